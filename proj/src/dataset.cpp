#include "zonalloss/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "zonalloss/errors.hpp"

namespace zonalloss {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

/// Comma-separated file with a header row. No quoting; '#' starts a comment line.
class Csv {
 public:
  struct Row {
    long line;
    std::vector<std::string> fields;
  };

  Csv(const fs::path& path, const std::vector<std::string>& required, const std::vector<std::string>& optional = {})
      : name_(path.string()) {
    std::ifstream in(path);
    if (!in) throw ParseError(name_, 0, 0, "cannot open file");
    std::string text;
    long line_no = 0;
    bool have_header = false;
    while (std::getline(in, text)) {
      ++line_no;
      const std::string t = trim(text);
      if (t.empty() || t[0] == '#') continue;
      std::vector<std::string> fields;
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = t.find(',', start);
        fields.push_back(trim(std::string_view(t).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (!have_header) {
        header_ = fields;
        have_header = true;
        continue;
      }
      if (fields.size() != header_.size())
        throw ParseError(name_, line_no, static_cast<long>(std::min(fields.size(), header_.size())) + 1,
                         "expected " + std::to_string(header_.size()) + " fields, found " +
                             std::to_string(fields.size()));
      rows_.push_back({line_no, std::move(fields)});
    }
    if (!have_header) throw ParseError(name_, 1, 1, "missing header row");
    for (const auto& col : required)
      if (column(col) < 0) throw ParseError(name_, 1, 1, "missing column '" + col + "'");
    for (const auto& col : header_)
      if (std::find(required.begin(), required.end(), col) == required.end() &&
          std::find(optional.begin(), optional.end(), col) == optional.end())
        throw ParseError(name_, 1, column(col) + 1, "unexpected column '" + col + "'");
  }

  const std::vector<Row>& rows() const { return rows_; }
  const std::string& name() const { return name_; }

  int column(const std::string& name) const {
    const auto it = std::find(header_.begin(), header_.end(), name);
    return it == header_.end() ? -1 : static_cast<int>(it - header_.begin());
  }

  const std::string& text(const Row& row, const std::string& col) const {
    const int c = column(col);
    if (row.fields[c].empty()) throw ParseError(name_, row.line, c + 1, "empty '" + col + "'");
    return row.fields[c];
  }

  std::optional<double> maybe_number(const Row& row, const std::string& col) const {
    const int c = column(col);
    if (c < 0 || row.fields[c].empty()) return std::nullopt;
    const std::string& s = row.fields[c];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      throw ParseError(name_, row.line, c + 1, "'" + col + "' is not a number: '" + s + "'");
    return v;
  }

  double number(const Row& row, const std::string& col) const {
    const auto v = maybe_number(row, col);
    if (!v) throw ParseError(name_, row.line, column(col) + 1, "empty '" + col + "'");
    return *v;
  }

  int hour(const Row& row) const {
    const int c = column("hour");
    const std::string& s = row.fields[c];
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 0)
      throw ParseError(name_, row.line, c + 1, "'hour' is not a non-negative integer: '" + s + "'");
    return v;
  }

  LineKind kind(const Row& row) const {
    try {
      return line_kind_from_string(text(row, "kind"));
    } catch (const Error& e) {
      throw ParseError(name_, row.line, column("kind") + 1, e.what());
    }
  }

 private:
  std::string name_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

/// Loss model from optional quad_a/quad_b/quad_c columns; absent when all three are blank.
/// A blank quad_b next to a given quad_a reads as zero.
std::optional<LossModel> read_loss_model(const Csv& csv, const Csv::Row& row) {
  const auto a = csv.maybe_number(row, "quad_a");
  const auto b = csv.maybe_number(row, "quad_b");
  const auto c = csv.maybe_number(row, "quad_c");
  if (!a && !b && !c) return std::nullopt;
  LossModel m;
  m.quad_a = a.value_or(0.0);
  m.quad_b = b.value_or(0.0);
  m.quad_c = c.value_or(0.0);
  const auto alpha = csv.maybe_number(row, "alpha");
  const auto beta = csv.maybe_number(row, "beta");
  if (alpha.has_value() != beta.has_value())
    throw ParseError(csv.name(), row.line, csv.column(alpha ? "beta" : "alpha") + 1,
                     "alpha and beta must be given together");
  if (alpha) m.linear = LinearFactors{*alpha, *beta};
  return m;
}

void read_hourly(const fs::path& path, const std::string& key, std::map<std::pair<int, std::string>, double>& out,
                 int& max_hour) {
  const Csv csv(path, {"hour", key, "mw"});
  for (const auto& row : csv.rows()) {
    const int h = csv.hour(row);
    const auto id = csv.text(row, key);
    if (!out.emplace(std::make_pair(h, id), csv.number(row, "mw")).second)
      throw ParseError(csv.name(), row.line, 1, "duplicate entry for hour " + std::to_string(h) + ", " + key + " " + id);
    max_hour = std::max(max_hour, h);
  }
}

fs::path resolve(const fs::path& base, const nlohmann::json& doc, const std::string& key, const std::string& file,
                 bool required) {
  if (!doc.contains(key)) {
    if (required) throw ParseError(file, 1, 1, "manifest lacks '" + key + "'");
    return {};
  }
  if (!doc[key].is_string()) throw ParseError(file, 1, 1, "manifest entry '" + key + "' is not a string");
  const fs::path p = doc[key].get<std::string>();
  const fs::path full = p.is_absolute() ? p : base / p;
  if (!fs::exists(full)) throw ReferentialError("manifest entry '" + key + "' names a missing file " + full.string());
  return full;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

DatasetManifest read_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string(), 0, 0, "cannot open file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(file.string(), 0, static_cast<long>(e.byte), e.what());
  }
  if (!doc.is_object()) throw ParseError(file.string(), 1, 1, "manifest must be a JSON object");
  const fs::path base = file.parent_path();
  const std::string name = file.string();
  DatasetManifest m;
  m.flows = resolve(base, doc, "flows", name, false);
  if (doc.contains("nodal")) {
    const auto& n = doc["nodal"];
    if (!n.is_object()) throw ParseError(name, 1, 1, "manifest entry 'nodal' is not an object");
    NodalFiles files;
    files.nodes = resolve(base, n, "nodes", name, true);
    files.generators = resolve(base, n, "generators", name, true);
    files.demand = resolve(base, n, "demand", name, true);
    files.injections = resolve(base, n, "injections", name, false);
    files.circuits = resolve(base, n, "circuits", name, true);
    m.nodal = files;
    return m;
  }
  m.zones = resolve(base, doc, "zones", name, true);
  m.generators = resolve(base, doc, "generators", name, true);
  m.interconnectors = resolve(base, doc, "interconnectors", name, true);
  m.atc = resolve(base, doc, "atc", name, true);
  m.demand = resolve(base, doc, "demand", name, true);
  m.injections = resolve(base, doc, "injections", name, false);
  return m;
}

ZonalDataset read_zonal(const DatasetManifest& manifest) {
  ZonalDataset data;
  {
    const Csv csv(manifest.zones, {"id"});
    for (const auto& row : csv.rows()) data.zones.push_back(csv.text(row, "id"));
  }
  {
    const Csv csv(manifest.generators, {"id", "zone", "cost", "p_min", "p_max"});
    for (const auto& row : csv.rows())
      data.generators.push_back({csv.text(row, "id"), csv.text(row, "zone"), csv.number(row, "cost"),
                                 csv.number(row, "p_min"), csv.number(row, "p_max")});
  }
  {
    const Csv csv(manifest.interconnectors, {"id", "kind", "from", "to", "rated"},
                  {"quad_a", "quad_b", "quad_c", "alpha", "beta"});
    for (const auto& row : csv.rows()) {
      Interconnector line;
      line.id = csv.text(row, "id");
      line.kind = csv.kind(row);
      line.from_zone = csv.text(row, "from");
      line.to_zone = csv.text(row, "to");
      line.rated_capacity = csv.number(row, "rated");
      line.loss_model = read_loss_model(csv, row);
      data.interconnectors.push_back(std::move(line));
    }
  }
  int max_hour = -1;
  {
    const Csv csv(manifest.atc, {"hour", "line", "fwd", "rev"});
    for (const auto& row : csv.rows()) {
      const int h = csv.hour(row);
      const auto id = csv.text(row, "line");
      if (!data.atc.emplace(std::make_pair(h, id), std::make_pair(csv.number(row, "fwd"), csv.number(row, "rev")))
               .second)
        throw ParseError(csv.name(), row.line, 1, "duplicate entry for hour " + std::to_string(h) + ", line " + id);
      max_hour = std::max(max_hour, h);
    }
  }
  read_hourly(manifest.demand, "zone", data.demand, max_hour);
  if (!manifest.injections.empty()) read_hourly(manifest.injections, "zone", data.injections, max_hour);
  data.hours = max_hour + 1;
  return data;
}

std::vector<MarketInstance> build_series(const ZonalDataset& data) {
  const std::set<std::string> zones(data.zones.begin(), data.zones.end());
  std::set<std::string> lines;
  for (const auto& line : data.interconnectors) lines.insert(line.id);
  for (const auto& [key, v] : data.atc)
    if (!lines.count(key.second))
      throw ReferentialError("ATC entry for hour " + std::to_string(key.first) + " names unknown line " + key.second);
  for (const auto* series : {&data.demand, &data.injections})
    for (const auto& [key, v] : *series)
      if (!zones.count(key.second))
        throw ReferentialError("hourly entry for hour " + std::to_string(key.first) + " names unknown zone " +
                               key.second);

  std::vector<MarketInstance> out;
  for (int h = 0; h < data.hours; ++h) {
    MarketInstance inst;
    inst.hour = h;
    for (const auto& z : data.zones) {
      const auto d = data.demand.find({h, z});
      if (d == data.demand.end())
        throw ReferentialError("demand missing for (hour " + std::to_string(h) + ", zone " + z + ")");
      const auto inj = data.injections.find({h, z});
      inst.zones.push_back({z, d->second, inj == data.injections.end() ? 0.0 : inj->second});
    }
    inst.generators = data.generators;
    for (auto line : data.interconnectors) {
      const auto a = data.atc.find({h, line.id});
      if (a == data.atc.end())
        throw ReferentialError("ATC missing for (hour " + std::to_string(h) + ", line " + line.id + ")");
      line.atc_fwd = a->second.first;
      line.atc_rev = a->second.second;
      inst.interconnectors.push_back(std::move(line));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

NodalDataset read_nodal(const NodalFiles& files) {
  NodalDataset data;
  {
    const Csv csv(files.nodes, {"node", "zone"});
    for (const auto& row : csv.rows()) {
      const auto node = csv.text(row, "node");
      if (!data.node_zone.emplace(node, csv.text(row, "zone")).second)
        throw ParseError(csv.name(), row.line, 1, "node " + node + " is mapped twice");
      data.node_order.push_back(node);
    }
  }
  {
    const Csv csv(files.generators, {"id", "node", "cost", "p_min", "p_max"});
    for (const auto& row : csv.rows())
      data.generators.push_back({csv.text(row, "id"), csv.text(row, "node"), csv.number(row, "cost"),
                                 csv.number(row, "p_min"), csv.number(row, "p_max")});
  }
  {
    const Csv csv(files.circuits, {"id", "kind", "from_node", "to_node", "rated", "limit_fwd", "limit_rev"},
                  {"quad_a", "quad_b", "quad_c"});
    for (const auto& row : csv.rows()) {
      NodeCircuit c;
      c.id = csv.text(row, "id");
      c.kind = csv.kind(row);
      c.from_node = csv.text(row, "from_node");
      c.to_node = csv.text(row, "to_node");
      c.rated = csv.number(row, "rated");
      c.limit_fwd = csv.number(row, "limit_fwd");
      c.limit_rev = csv.number(row, "limit_rev");
      c.loss.quad_a = csv.maybe_number(row, "quad_a").value_or(0.0);
      c.loss.quad_b = csv.maybe_number(row, "quad_b").value_or(0.0);
      c.loss.quad_c = csv.maybe_number(row, "quad_c").value_or(0.0);
      data.circuits.push_back(std::move(c));
    }
  }
  int max_hour = -1;
  read_hourly(files.demand, "node", data.demand, max_hour);
  if (!files.injections.empty()) read_hourly(files.injections, "node", data.injections, max_hour);
  data.hours = max_hour + 1;
  return data;
}

ZonalDataset aggregate_nodal_to_zonal(const NodalDataset& nodal, AggregationMetadata* metadata) {
  auto zone_of = [&](const std::string& node) -> const std::string& {
    const auto it = nodal.node_zone.find(node);
    if (it == nodal.node_zone.end()) throw UnmappedNode("node " + node + " is not mapped to a zone");
    return it->second;
  };

  ZonalDataset z;
  z.hours = nodal.hours;
  for (const auto& node : nodal.node_order) {
    const auto& zone = zone_of(node);
    if (std::find(z.zones.begin(), z.zones.end(), zone) == z.zones.end()) z.zones.push_back(zone);
  }
  for (auto g : nodal.generators) {
    g.zone = zone_of(g.zone);
    z.generators.push_back(std::move(g));
  }
  for (const auto& [key, mw] : nodal.demand) z.demand[{key.first, zone_of(key.second)}] += mw;
  for (const auto& [key, mw] : nodal.injections) z.injections[{key.first, zone_of(key.second)}] += mw;
  // Zones without nodal demand entries in an hour carry zero demand.
  for (int h = 0; h < z.hours; ++h)
    for (const auto& zone : z.zones) z.demand.try_emplace({h, zone}, 0.0);

  struct Group {
    Interconnector line;
    std::vector<const NodeCircuit*> members;
    std::vector<bool> reversed;
  };
  std::vector<Group> groups;
  for (const auto& c : nodal.circuits) {
    const auto& from = zone_of(c.from_node);
    const auto& to = zone_of(c.to_node);
    if (from == to) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.line.kind == c.kind && ((g.line.from_zone == from && g.line.to_zone == to) ||
                                       (g.line.from_zone == to && g.line.to_zone == from));
    });
    if (it == groups.end()) {
      Group g;
      g.line.kind = c.kind;
      g.line.from_zone = from;
      g.line.to_zone = to;
      groups.push_back(std::move(g));
      it = std::prev(groups.end());
    }
    it->members.push_back(&c);
    it->reversed.push_back(it->line.from_zone != from);
  }

  for (auto& g : groups) {
    auto& line = g.line;
    line.id = g.members.size() == 1 ? g.members[0]->id
                                    : line.from_zone + "-" + line.to_zone + (line.kind == LineKind::HVDC ? "-DC" : "");
    bool any_zero_a = false;
    double inv_a = 0.0;
    for (const auto* c : g.members) {
      if (c->loss.quad_a == 0.0) any_zero_a = true;
      else inv_a += 1.0 / c->loss.quad_a;
    }
    LossModel m;
    m.quad_a = any_zero_a ? 0.0 : 1.0 / inv_a;
    double zero_count = 0.0;
    for (const auto* c : g.members) zero_count += c->loss.quad_a == 0.0 ? 1.0 : 0.0;
    for (std::size_t k = 0; k < g.members.size(); ++k) {
      const auto* c = g.members[k];
      const double share = any_zero_a ? (c->loss.quad_a == 0.0 ? 1.0 / zero_count : 0.0) : (1.0 / c->loss.quad_a) / inv_a;
      m.quad_b += share * c->loss.quad_b;
      m.quad_c += c->loss.quad_c;
      line.rated_capacity += c->rated;
      line.atc_fwd += g.reversed[k] ? c->limit_rev : c->limit_fwd;
      line.atc_rev += g.reversed[k] ? c->limit_fwd : c->limit_rev;
    }
    line.loss_model = m;
    for (int h = 0; h < z.hours; ++h) z.atc[{h, line.id}] = {line.atc_fwd, line.atc_rev};
    if (metadata) {
      AggregatedLine a{line.id, {}};
      for (const auto* c : g.members) a.circuits.push_back(c->id);
      metadata->lines.push_back(std::move(a));
    }
    line.atc_fwd = 0.0;
    line.atc_rev = 0.0;
    z.interconnectors.push_back(std::move(line));
  }
  if (metadata)
    metadata->notes.push_back(
        "equivalent-line ATC is the sum of member circuit limits; intra-zonal circuits are dropped");
  return z;
}

LoadedSeries load_series(const DatasetManifest& manifest) {
  LoadedSeries out;
  ZonalDataset data;
  if (manifest.nodal) {
    AggregationMetadata meta;
    data = aggregate_nodal_to_zonal(read_nodal(*manifest.nodal), &meta);
    out.aggregation = std::move(meta);
  } else {
    data = read_zonal(manifest);
  }
  out.series = build_series(data);
  for (auto& inst : out.series) {
    for (auto& w : clamp_negative_atc(inst)) out.warnings.push_back("hour " + std::to_string(inst.hour) + ": " + w);
    for (auto& v : validate_instance(inst)) out.violations.emplace_back(inst.hour, std::move(v));
  }
  if (!manifest.flows.empty()) {
    const Csv csv(manifest.flows, {"hour", "line", "mw"});
    for (const auto& row : csv.rows()) {
      const auto id = csv.text(row, "line");
      if (std::none_of(data.interconnectors.begin(), data.interconnectors.end(),
                       [&](const Interconnector& l) { return l.id == id; }))
        throw ReferentialError("flow history names unknown line " + id);
      auto& hist = out.flows[id];
      hist.line_id = id;
      hist.samples.push_back(csv.number(row, "mw"));
    }
  }
  return out;
}

std::map<std::string, LinearFactors> linear_factors_from_history(const LoadedSeries& loaded,
                                                                 std::vector<std::string>* skipped) {
  std::map<std::string, LinearFactors> out;
  if (loaded.series.empty()) return out;
  for (const auto& line : loaded.series.front().interconnectors) {
    if (!line.loss_model || line.loss_model->linear) continue;
    const auto it = loaded.flows.find(line.id);
    try {
      if (it == loaded.flows.end()) throw NoNonzeroFlows("no flow history");
      out[line.id] = linear_factors(*line.loss_model, it->second);
    } catch (const NoNonzeroFlows&) {
      if (skipped) skipped->push_back(line.id);
    }
  }
  return out;
}

fs::path write_series(const std::vector<MarketInstance>& series, const fs::path& dir) {
  if (series.empty()) throw Error("cannot write an empty series");
  fs::create_directories(dir);
  const MarketInstance& first = series.front();
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw Error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("zones.csv");
    f << "id\n";
    for (const auto& z : first.zones) f << z.id << '\n';
  }
  {
    auto f = open("generators.csv");
    f << "id,zone,cost,p_min,p_max\n";
    for (const auto& g : first.generators)
      f << g.id << ',' << g.zone << ',' << fmt(g.cost) << ',' << fmt(g.p_min) << ',' << fmt(g.p_max) << '\n';
  }
  {
    auto f = open("interconnectors.csv");
    f << "id,kind,from,to,rated,quad_a,quad_b,quad_c,alpha,beta\n";
    for (const auto& l : first.interconnectors) {
      f << l.id << ',' << to_string(l.kind) << ',' << l.from_zone << ',' << l.to_zone << ',' << fmt(l.rated_capacity);
      if (l.loss_model) {
        const auto& m = *l.loss_model;
        f << ',' << fmt(m.quad_a) << ',' << fmt(m.quad_b) << ',' << fmt(m.quad_c);
        if (m.linear) f << ',' << fmt(m.linear->alpha) << ',' << fmt(m.linear->beta);
        else f << ",,";
      } else {
        f << ",,,,,";
      }
      f << '\n';
    }
  }
  auto atc = open("atc.csv");
  auto demand = open("demand.csv");
  auto inj = open("injections.csv");
  atc << "hour,line,fwd,rev\n";
  demand << "hour,zone,mw\n";
  inj << "hour,zone,mw\n";
  for (std::size_t h = 0; h < series.size(); ++h) {
    const auto& inst = series[h];
    if (inst.hour != static_cast<int>(h)) throw Error("series hours must run 0, 1, 2, ...");
    for (const auto& l : inst.interconnectors)
      atc << h << ',' << l.id << ',' << fmt(l.atc_fwd) << ',' << fmt(l.atc_rev) << '\n';
    for (const auto& z : inst.zones) {
      demand << h << ',' << z.id << ',' << fmt(z.demand) << '\n';
      if (z.fixed_injection != 0.0) inj << h << ',' << z.id << ',' << fmt(z.fixed_injection) << '\n';
    }
  }
  const fs::path manifest = dir / "manifest.json";
  std::ofstream mf(manifest);
  mf << nlohmann::ordered_json{{"zones", "zones.csv"},
                               {"generators", "generators.csv"},
                               {"interconnectors", "interconnectors.csv"},
                               {"atc", "atc.csv"},
                               {"demand", "demand.csv"},
                               {"injections", "injections.csv"}}
            .dump(2)
     << '\n';
  return manifest;
}

}  // namespace zonalloss

#include "zonalloss/study.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "zonalloss/errors.hpp"

namespace zonalloss {

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::S1_NoLF: return "S1_NoLF";
    case ScenarioId::S2_LinearHVDC: return "S2_LinearHVDC";
    case ScenarioId::S3_PiecewiseHVDC: return "S3_PiecewiseHVDC";
    case ScenarioId::S4_LinearACHVDC: return "S4_LinearACHVDC";
    case ScenarioId::S5_PiecewiseACHVDC: return "S5_PiecewiseACHVDC";
  }
  return "?";
}

ScenarioId scenario_from_string(const std::string& text) {
  for (ScenarioId id : kAllScenarios) {
    const std::string name = to_string(id);
    if (text == name || text == name.substr(0, 2)) return id;
  }
  throw Error("unknown scenario '" + text + "'");
}

ScenarioSelection scenario_selection(const MarketInstance& instance, ScenarioId id) {
  ScenarioSelection sel;
  switch (id) {
    case ScenarioId::S1_NoLF: sel.treatment = LossTreatment::FixedLosses; break;
    case ScenarioId::S2_LinearHVDC:
    case ScenarioId::S4_LinearACHVDC: sel.treatment = LossTreatment::LinearLF; break;
    case ScenarioId::S3_PiecewiseHVDC:
    case ScenarioId::S5_PiecewiseACHVDC: sel.treatment = LossTreatment::PiecewiseLF; break;
  }
  const bool hvdc_only = id == ScenarioId::S2_LinearHVDC || id == ScenarioId::S3_PiecewiseHVDC;
  for (const auto& line : instance.interconnectors) {
    if (!line.loss_model) continue;
    const bool factors = id != ScenarioId::S1_NoLF && (!hvdc_only || line.kind == LineKind::HVDC);
    (factors ? sel.factor_lines : sel.estimated_lines).insert(line.id);
  }
  return sel;
}

std::map<std::string, double> estimate_fixed_losses(const MarketInstance& instance,
                                                    const std::set<std::string>& lines,
                                                    const SolverBackend& backend) {
  std::map<std::string, double> estimates;
  if (lines.empty()) return estimates;
  const DispatchResult r = clear(instance, FormulationSpec::lossless(), backend);
  if (r.status != SolveStatus::Optimal)
    throw StatusNotOptimal("lossless first pass returned " + to_string(r.status));
  for (const auto& id : lines) {
    const int l = instance.line_index(id);
    if (l < 0) throw Error("estimate requested for unknown line " + id);
    const auto& line = instance.interconnectors[l];
    estimates[id] = line.loss_model ? quadratic_loss(*line.loss_model, r.flow[l]) : 0.0;
  }
  return estimates;
}

FormulationSpec scenario_spec(const MarketInstance& instance, ScenarioId id, const SolverBackend& backend,
                              std::vector<double>* first_pass_flow) {
  const ScenarioSelection sel = scenario_selection(instance, id);
  std::map<std::string, double> estimates;
  if (first_pass_flow) first_pass_flow->clear();
  if (!sel.estimated_lines.empty()) {
    const DispatchResult first = clear(instance, FormulationSpec::lossless(), backend);
    if (first.status != SolveStatus::Optimal)
      throw StatusNotOptimal("lossless first pass returned " + to_string(first.status));
    for (const auto& lid : sel.estimated_lines) {
      const int l = instance.line_index(lid);
      estimates[lid] = quadratic_loss(*instance.interconnectors[l].loss_model, first.flow[l]);
    }
    if (first_pass_flow) *first_pass_flow = first.flow;
  }
  if (id == ScenarioId::S1_NoLF) return FormulationSpec::fixed(std::move(estimates));
  return FormulationSpec::with_factors(sel.treatment, sel.factor_lines, std::move(estimates));
}

int ScenarioResult::skipped_hours() const {
  int n = 0;
  for (const auto& h : hours) n += h.solved() ? 0 : 1;
  return n;
}

int ScenarioResult::non_fixed_point_hours() const {
  int n = 0;
  for (const auto& h : hours) n += h.solved() && !h.fixed_point ? 1 : 0;
  return n;
}

void calibrate_series(std::vector<MarketInstance>& series, const std::map<std::string, LinearFactors>& linear,
                      double segment_mw) {
  for (auto& inst : series) {
    for (auto& line : inst.interconnectors) {
      if (!line.loss_model) continue;
      if (auto it = linear.find(line.id); it != linear.end()) line.loss_model->linear = it->second;
      if (segment_mw > 0.0)
        line.loss_model->piecewise = piecewise_factors(*line.loss_model, line.rated_capacity, segment_mw);
    }
  }
}

namespace {

constexpr double kFixedPointTol = 1e-6;

void check_calibration(const MarketInstance& inst, const ScenarioSelection& sel) {
  for (const auto& id : sel.factor_lines) {
    const auto& model = *inst.interconnectors[inst.line_index(id)].loss_model;
    if (sel.treatment == LossTreatment::LinearLF && !model.linear)
      throw CalibrationMissing("hour " + std::to_string(inst.hour) + ": line " + id + " has no linear factors");
    if (sel.treatment == LossTreatment::PiecewiseLF && model.piecewise.empty())
      throw CalibrationMissing("hour " + std::to_string(inst.hour) + ": line " + id + " has no piecewise factors");
  }
}

HourResult run_hour(const MarketInstance& inst, ScenarioId id, const SolverBackend& backend) {
  HourResult h;
  h.hour = inst.hour;
  const auto start = std::chrono::steady_clock::now();
  try {
    const FormulationSpec spec = scenario_spec(inst, id, backend, &h.first_pass_flow);
    h.dispatch = clear(inst, spec, backend);
    h.status = h.dispatch.status;
    if (!h.solved()) {
      h.diagnostic = "clearing " + to_string(h.status);
    } else {
      h.expost_loss.assign(inst.interconnectors.size(), 0.0);
      for (std::size_t l = 0; l < inst.interconnectors.size(); ++l) {
        const auto& line = inst.interconnectors[l];
        if (line.loss_model) h.expost_loss[l] = quadratic_loss(*line.loss_model, h.dispatch.flow[l]);
      }
      for (const auto& [lid, estimate] : spec.fixed_losses) {
        const int l = inst.line_index(lid);
        if (std::abs(h.dispatch.flow[l] - h.first_pass_flow[l]) > kFixedPointTol) h.fixed_point = false;
      }
    }
  } catch (const CalibrationMissing&) {
    throw;
  } catch (const StatusNotOptimal& e) {
    h.status = SolveStatus::Infeasible;
    h.diagnostic = e.what();
  } catch (const Error& e) {
    h.status = SolveStatus::IterationLimit;
    h.diagnostic = e.what();
  }
  h.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return h;
}

}  // namespace

ScenarioResult run_scenario(const std::vector<MarketInstance>& series, ScenarioId id, const StudyConfig& config,
                            const SolverBackend* backend) {
  const BuiltinBackend builtin(config.milp);
  const SolverBackend& engine = backend ? *backend : builtin;

  ScenarioResult result;
  result.id = id;
  if (!series.empty()) {
    const auto& first = series.front();
    for (const auto& line : first.interconnectors) {
      result.line_ids.push_back(line.id);
      result.line_kinds.push_back(line.kind);
      result.line_from.push_back(line.from_zone);
      result.line_to.push_back(line.to_zone);
      result.line_has_model.push_back(line.loss_model.has_value());
    }
    for (const auto& z : first.zones) result.zone_ids.push_back(z.id);
  }
  for (const auto& inst : series) {
    if (inst.interconnectors.size() != result.line_ids.size() || inst.zones.size() != result.zone_ids.size())
      throw SeriesMismatch("hour " + std::to_string(inst.hour) + " has a different topology");
    check_calibration(inst, scenario_selection(inst, id));
  }

  result.hours.resize(series.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < series.size(); i = next++) {
      try {
        result.hours[i] = run_hour(series[i], id, engine);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(series.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::stable_sort(result.hours.begin(), result.hours.end(),
                   [](const HourResult& a, const HourResult& b) { return a.hour < b.hour; });
  return result;
}

namespace {

struct Totals {
  double hvdc_mw = 0.0;
  double ac_mw = 0.0;
  double cost_eur = 0.0;
};

Totals hour_totals(const ScenarioResult& r, const HourResult& h) {
  Totals t;
  if (!h.solved()) return t;
  for (std::size_t l = 0; l < h.expost_loss.size(); ++l)
    (r.line_kinds[l] == LineKind::HVDC ? t.hvdc_mw : t.ac_mw) += h.expost_loss[l];
  t.cost_eur = h.dispatch.objective;
  return t;
}

double percent(double delta, double base) { return base == 0.0 ? 0.0 : 100.0 * delta / base; }

}  // namespace

StudyReport compare_scenarios(const std::vector<ScenarioResult>& results, ScenarioId reference) {
  StudyReport report;
  report.reference = reference;
  const ScenarioResult* ref = nullptr;
  for (const auto& r : results)
    if (r.id == reference) ref = &r;
  if (!ref) throw SeriesMismatch("reference scenario " + to_string(reference) + " is not among the results");
  report.hours = static_cast<int>(ref->hours.size());
  for (const auto& r : results) {
    if (r.hours.size() != ref->hours.size())
      throw SeriesMismatch(to_string(r.id) + " covers " + std::to_string(r.hours.size()) + " hours, " +
                           to_string(reference) + " covers " + std::to_string(ref->hours.size()));
    for (std::size_t i = 0; i < r.hours.size(); ++i)
      if (r.hours[i].hour != ref->hours[i].hour)
        throw SeriesMismatch(to_string(r.id) + " hour " + std::to_string(r.hours[i].hour) + " does not match " +
                             to_string(reference) + " hour " + std::to_string(ref->hours[i].hour));
    if (r.line_kinds != ref->line_kinds) throw SeriesMismatch(to_string(r.id) + " has a different line set");
  }

  std::vector<bool> common(ref->hours.size(), true);
  for (const auto& r : results)
    for (std::size_t i = 0; i < r.hours.size(); ++i) common[i] = common[i] && r.hours[i].solved();
  for (bool c : common) report.common_hours += c ? 1 : 0;

  std::vector<Totals> totals;
  for (const auto& r : results) {
    Totals sum;
    for (std::size_t i = 0; i < r.hours.size(); ++i) {
      const Totals t = hour_totals(r, r.hours[i]);
      report.detail.push_back({r.id, r.hours[i].hour, r.hours[i].status, t.cost_eur, t.hvdc_mw, t.ac_mw});
      if (!common[i]) continue;
      sum.hvdc_mw += t.hvdc_mw;
      sum.ac_mw += t.ac_mw;
      sum.cost_eur += t.cost_eur;
    }
    totals.push_back(sum);
  }
  const Totals& base = totals[static_cast<std::size_t>(ref - results.data())];
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    const Totals& t = totals[k];
    ScenarioSummary s;
    s.id = r.id;
    s.hours_skipped = r.skipped_hours();
    s.hours_solved = static_cast<int>(r.hours.size()) - s.hours_skipped;
    s.non_fixed_point_hours = r.non_fixed_point_hours();
    s.hvdc_loss_gwh = t.hvdc_mw / 1000.0;
    s.ac_loss_gwh = t.ac_mw / 1000.0;
    s.total_loss_gwh = (t.hvdc_mw + t.ac_mw) / 1000.0;
    s.system_cost_meur = t.cost_eur / 1e6;
    const double dh = t.hvdc_mw - base.hvdc_mw;
    const double da = t.ac_mw - base.ac_mw;
    s.delta_hvdc_gwh = dh / 1000.0;
    s.delta_ac_gwh = da / 1000.0;
    s.delta_total_gwh = (dh + da) / 1000.0;
    s.delta_hvdc_pct = percent(dh, base.hvdc_mw);
    s.delta_ac_pct = percent(da, base.ac_mw);
    s.delta_total_pct = percent(dh + da, base.hvdc_mw + base.ac_mw);
    s.savings_meur = (base.cost_eur - t.cost_eur) / 1e6;
    report.scenarios.push_back(s);
  }
  return report;
}

std::vector<LineLossCost> tso_loss_cost_accounting(const ScenarioResult& result) {
  std::vector<LineLossCost> rows;
  for (std::size_t l = 0; l < result.line_ids.size(); ++l) {
    if (!result.line_has_model[l]) continue;
    LineLossCost row;
    row.line_id = result.line_ids[l];
    row.kind = result.line_kinds[l];
    row.from_zone = result.line_from[l];
    row.to_zone = result.line_to[l];
    const auto zone_of = [&](const std::string& id) {
      return static_cast<std::size_t>(std::find(result.zone_ids.begin(), result.zone_ids.end(), id) -
                                      result.zone_ids.begin());
    };
    const std::size_t zf = zone_of(row.from_zone);
    const std::size_t zt = zone_of(row.to_zone);
    for (const auto& h : result.hours) {
      if (!h.solved()) continue;
      ++row.hours;
      const double pf = h.dispatch.zonal_price[zf];
      const double pt = h.dispatch.zonal_price[zt];
      if (std::abs(pf - pt) >= kZeroPriceDiff) continue;
      ++row.zero_price_diff_hours;
      row.loss_cost_eur += h.expost_loss[l] * 0.5 * (pf + pt);
    }
    row.from_share_eur = 0.5 * row.loss_cost_eur;
    row.to_share_eur = 0.5 * row.loss_cost_eur;
    rows.push_back(row);
  }
  return rows;
}

namespace {

// Fixed-point text that never prints "-0.000000".
std::string num(double v, int digits = 6) {
  const double scale = std::pow(10.0, digits);
  if (std::abs(v) * scale < 0.5) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_report_csv(std::ostream& out, const StudyReport& report) {
  out << "scenario,hours_solved,hours_skipped,non_fixed_point_hours,hvdc_loss_gwh,ac_loss_gwh,total_loss_gwh,"
         "system_cost_meur,delta_hvdc_gwh,delta_ac_gwh,delta_total_gwh,delta_hvdc_pct,delta_ac_pct,delta_total_pct,"
         "savings_meur\n";
  for (const auto& s : report.scenarios) {
    out << to_string(s.id) << ',' << s.hours_solved << ',' << s.hours_skipped << ',' << s.non_fixed_point_hours << ','
        << num(s.hvdc_loss_gwh) << ',' << num(s.ac_loss_gwh) << ',' << num(s.total_loss_gwh) << ','
        << num(s.system_cost_meur) << ',' << num(s.delta_hvdc_gwh) << ',' << num(s.delta_ac_gwh) << ','
        << num(s.delta_total_gwh) << ',' << num(s.delta_hvdc_pct, 4) << ',' << num(s.delta_ac_pct, 4) << ','
        << num(s.delta_total_pct, 4) << ',' << num(s.savings_meur) << '\n';
  }
}

void write_detail_csv(std::ostream& out, const StudyReport& report) {
  out << "scenario,hour,status,system_cost_eur,hvdc_loss_mw,ac_loss_mw\n";
  for (const auto& d : report.detail)
    out << to_string(d.id) << ',' << d.hour << ',' << to_string(d.status) << ',' << num(d.system_cost_eur, 4) << ','
        << num(d.hvdc_loss_mw) << ',' << num(d.ac_loss_mw) << '\n';
}

void write_accounting_csv(std::ostream& out, ScenarioId id, const std::vector<LineLossCost>& rows) {
  out << "scenario,line,kind,from,to,hours,zero_price_diff_hours,loss_cost_eur,from_share_eur,to_share_eur\n";
  for (const auto& r : rows)
    out << to_string(id) << ',' << r.line_id << ',' << to_string(r.kind) << ',' << r.from_zone << ',' << r.to_zone
        << ',' << r.hours << ',' << r.zero_price_diff_hours << ',' << num(r.loss_cost_eur, 2) << ','
        << num(r.from_share_eur, 2) << ',' << num(r.to_share_eur, 2) << '\n';
}

void write_report_json(std::ostream& out, const StudyReport& report,
                       const std::vector<std::vector<LineLossCost>>& accounting) {
  nlohmann::ordered_json doc;
  doc["reference"] = to_string(report.reference);
  doc["hours"] = report.hours;
  doc["common_hours"] = report.common_hours;
  auto& scenarios = doc["scenarios"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < report.scenarios.size(); ++k) {
    const auto& s = report.scenarios[k];
    nlohmann::ordered_json j;
    j["scenario"] = to_string(s.id);
    j["hours_solved"] = s.hours_solved;
    j["hours_skipped"] = s.hours_skipped;
    j["non_fixed_point_hours"] = s.non_fixed_point_hours;
    j["hvdc_loss_gwh"] = s.hvdc_loss_gwh;
    j["ac_loss_gwh"] = s.ac_loss_gwh;
    j["total_loss_gwh"] = s.total_loss_gwh;
    j["system_cost_meur"] = s.system_cost_meur;
    j["delta_hvdc_gwh"] = s.delta_hvdc_gwh;
    j["delta_ac_gwh"] = s.delta_ac_gwh;
    j["delta_total_gwh"] = s.delta_total_gwh;
    j["delta_hvdc_pct"] = s.delta_hvdc_pct;
    j["delta_ac_pct"] = s.delta_ac_pct;
    j["delta_total_pct"] = s.delta_total_pct;
    j["savings_meur"] = s.savings_meur;
    if (k < accounting.size()) {
      auto& acc = j["loss_cost_accounting"] = nlohmann::ordered_json::array();
      for (const auto& r : accounting[k]) {
        acc.push_back({{"line", r.line_id},
                       {"kind", to_string(r.kind)},
                       {"from", r.from_zone},
                       {"to", r.to_zone},
                       {"hours", r.hours},
                       {"zero_price_diff_hours", r.zero_price_diff_hours},
                       {"loss_cost_eur", r.loss_cost_eur},
                       {"from_share_eur", r.from_share_eur},
                       {"to_share_eur", r.to_share_eur}});
      }
    }
    scenarios.push_back(std::move(j));
  }
  out << doc.dump(2) << '\n';
}

void write_hourly_detail(const std::string& path, const std::vector<ScenarioResult>& results) {
  std::ostringstream os;
  os << "scenario,hour,status,line,flow_mw,modeled_loss_mw,fixed_loss_mw,expost_loss_mw,price_from,price_to\n";
  for (const auto& r : results) {
    for (const auto& h : r.hours) {
      if (!h.solved()) {
        os << to_string(r.id) << ',' << h.hour << ',' << to_string(h.status) << ",,,,,,,\n";
        continue;
      }
      for (std::size_t l = 0; l < r.line_ids.size(); ++l) {
        const auto zf = std::find(r.zone_ids.begin(), r.zone_ids.end(), r.line_from[l]) - r.zone_ids.begin();
        const auto zt = std::find(r.zone_ids.begin(), r.zone_ids.end(), r.line_to[l]) - r.zone_ids.begin();
        os << to_string(r.id) << ',' << h.hour << ',' << to_string(h.status) << ',' << r.line_ids[l] << ','
           << num(h.dispatch.flow[l]) << ',' << num(h.dispatch.modeled_loss[l]) << ','
           << num(h.dispatch.fixed_loss[l]) << ',' << num(h.expost_loss[l]) << ','
           << num(h.dispatch.zonal_price[zf]) << ',' << num(h.dispatch.zonal_price[zt]) << '\n';
      }
    }
  }
  const std::string text = os.str();
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    gzFile gz = gzopen(path.c_str(), "wb");
    if (!gz) throw Error("cannot open " + path);
    const int written = gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
    gzclose(gz);
    if (written != static_cast<int>(text.size())) throw Error("short write to " + path);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error("cannot open " + path);
  file << text;
}

}  // namespace zonalloss

#include "zonalloss/market.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "zonalloss/errors.hpp"

namespace zonalloss {

namespace {

constexpr double kGridTol = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

bool close(double a, double b) { return std::abs(a - b) <= kGridTol * std::max(1.0, std::abs(b)); }

}  // namespace

std::string to_string(LineKind kind) { return kind == LineKind::HVDC ? "HVDC" : "AC"; }

LineKind line_kind_from_string(const std::string& text) {
  if (text == "AC" || text == "ac") return LineKind::AC;
  if (text == "HVDC" || text == "hvdc" || text == "DC" || text == "dc") return LineKind::HVDC;
  throw Error("unknown line kind '" + text + "'");
}

int MarketInstance::zone_index(const std::string& id) const {
  for (std::size_t i = 0; i < zones.size(); ++i)
    if (zones[i].id == id) return static_cast<int>(i);
  return -1;
}

int MarketInstance::line_index(const std::string& id) const {
  for (std::size_t i = 0; i < interconnectors.size(); ++i)
    if (interconnectors[i].id == id) return static_cast<int>(i);
  return -1;
}

double MarketInstance::net_demand() const {
  double total = 0.0;
  for (const auto& z : zones) total += z.demand - z.fixed_injection;
  return total;
}

double MarketInstance::flexible_capacity() const {
  double total = 0.0;
  for (const auto& g : generators) total += g.p_max;
  return total;
}

void validate_loss_model(const LossModel& model, double rated_capacity, const std::string& entity,
                         ValidationReport& report) {
  if (model.quad_a < 0.0) report.push_back({entity, rules::kNegativeQuadA, fmt(model.quad_a)});
  if (model.quad_c < 0.0) report.push_back({entity, rules::kNegativeQuadC, fmt(model.quad_c)});
  const auto& segs = model.piecewise;
  if (segs.empty()) return;

  const double width = segs.front().hi - segs.front().lo;
  bool grid_ok = close(segs.front().lo, 0.0) && width > 0.0;
  for (std::size_t k = 0; k < segs.size() && grid_ok; ++k) {
    if (k > 0 && !close(segs[k].lo, segs[k - 1].hi)) grid_ok = false;
    const double w = segs[k].hi - segs[k].lo;
    const bool last = k + 1 == segs.size();
    if (w <= 0.0) grid_ok = false;
    if (!last && !close(w, width)) grid_ok = false;
    if (last && w > width * (1.0 + kGridTol)) grid_ok = false;
  }
  if (grid_ok && !close(segs.back().hi, rated_capacity)) grid_ok = false;
  if (!grid_ok)
    report.push_back({entity, rules::kSegmentGrid,
                      "segments must tile [0, " + fmt(rated_capacity) + "] with equal widths"});

  if (model.quad_a > 0.0) {
    for (std::size_t k = 1; k < segs.size(); ++k) {
      if (!(segs[k].alpha > segs[k - 1].alpha)) {
        report.push_back({entity, rules::kSegmentSlopes, "segment " + std::to_string(k + 1)});
        break;
      }
    }
  }
}

ValidationReport validate_instance(const MarketInstance& instance) {
  ValidationReport report;

  std::set<std::string> zone_ids;
  for (const auto& z : instance.zones) {
    if (!zone_ids.insert(z.id).second) report.push_back({z.id, rules::kDuplicateId, "zone"});
    if (z.demand < 0.0) report.push_back({z.id, rules::kNegativeDemand, fmt(z.demand)});
  }

  std::set<std::string> gen_ids;
  for (const auto& g : instance.generators) {
    if (!gen_ids.insert(g.id).second) report.push_back({g.id, rules::kDuplicateId, "generator"});
    if (!zone_ids.count(g.zone)) report.push_back({g.id, rules::kUnknownZone, g.zone});
    if (g.p_min > g.p_max)
      report.push_back({g.id, rules::kPminAbovePmax, fmt(g.p_min) + ">" + fmt(g.p_max)});
  }

  std::set<std::string> line_ids;
  for (const auto& l : instance.interconnectors) {
    if (!line_ids.insert(l.id).second) report.push_back({l.id, rules::kDuplicateId, "interconnector"});
    if (!zone_ids.count(l.from_zone)) report.push_back({l.id, rules::kUnknownZone, l.from_zone});
    if (!zone_ids.count(l.to_zone)) report.push_back({l.id, rules::kUnknownZone, l.to_zone});
    if (l.from_zone == l.to_zone) report.push_back({l.id, rules::kSelfLoop, l.from_zone});
    if (l.rated_capacity <= 0.0)
      report.push_back({l.id, rules::kNonPositiveRating, fmt(l.rated_capacity)});
    if (l.atc_fwd < 0.0 || l.atc_rev < 0.0)
      report.push_back({l.id, rules::kNegativeAtc, fmt(l.atc_fwd) + "/" + fmt(l.atc_rev)});
    if (l.atc_fwd > l.rated_capacity || l.atc_rev > l.rated_capacity)
      report.push_back({l.id, rules::kAtcExceedsRating,
                        fmt(std::max(l.atc_fwd, l.atc_rev)) + ">" + fmt(l.rated_capacity)});
    if (l.loss_model) validate_loss_model(*l.loss_model, l.rated_capacity, l.id, report);
  }

  const double net = instance.net_demand();
  const double cap = instance.flexible_capacity();
  if (cap < net)
    report.push_back({"hour " + std::to_string(instance.hour), rules::kSupplyShortfall,
                      fmt(cap) + "<" + fmt(net)});
  return report;
}

std::vector<std::string> clamp_negative_atc(MarketInstance& instance) {
  std::vector<std::string> warnings;
  const std::string when = " at hour " + std::to_string(instance.hour);
  for (auto& l : instance.interconnectors) {
    if (l.atc_fwd < 0.0) {
      warnings.push_back("clamped negative forward ATC " + fmt(l.atc_fwd) + " on " + l.id + when);
      l.atc_fwd = 0.0;
    }
    if (l.atc_rev < 0.0) {
      warnings.push_back("clamped negative reverse ATC " + fmt(l.atc_rev) + " on " + l.id + when);
      l.atc_rev = 0.0;
    }
  }
  return warnings;
}

}  // namespace zonalloss

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zonalloss {

enum class LineKind { AC, HVDC };

std::string to_string(LineKind kind);
LineKind line_kind_from_string(const std::string& text);

struct LinearFactors {
  double alpha = 0.0;  // MW per MW of flow
  double beta = 0.0;   // MW

  bool operator==(const LinearFactors&) const = default;
};

/// One piece of a piecewise-linear loss curve, valid for |flow| in [lo, hi].
struct LossSegment {
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  bool operator==(const LossSegment&) const = default;
};

/// Quadratic loss curve a*f^2 + b*|f| + c plus the factors calibrated from it.
struct LossModel {
  double quad_a = 0.0;  // 1/MW
  double quad_b = 0.0;
  double quad_c = 0.0;  // MW, stand-by loss
  std::optional<LinearFactors> linear;
  std::vector<LossSegment> piecewise;

  bool operator==(const LossModel&) const = default;
};

struct Zone {
  std::string id;
  double demand = 0.0;           // MW
  double fixed_injection = 0.0;  // MW, signed; renewables and fixed neighbour exchanges

  bool operator==(const Zone&) const = default;
};

struct Generator {
  std::string id;
  std::string zone;
  double cost = 0.0;  // EUR/MWh, may be negative
  double p_min = 0.0;
  double p_max = 0.0;

  bool operator==(const Generator&) const = default;
};

/// Zone-to-zone transfer path. Positive flow runs from_zone -> to_zone.
struct Interconnector {
  std::string id;
  LineKind kind = LineKind::AC;
  std::string from_zone;
  std::string to_zone;
  double atc_fwd = 0.0;
  double atc_rev = 0.0;
  double rated_capacity = 0.0;
  std::optional<LossModel> loss_model;

  bool operator==(const Interconnector&) const = default;
};

struct MarketInstance {
  int hour = 0;
  std::vector<Zone> zones;
  std::vector<Generator> generators;
  std::vector<Interconnector> interconnectors;

  bool operator==(const MarketInstance&) const = default;

  /// Index lookups; -1 when the id is unknown.
  int zone_index(const std::string& id) const;
  int line_index(const std::string& id) const;

  /// Total demand minus fixed injections over all zones.
  double net_demand() const;
  double flexible_capacity() const;
};

struct Violation {
  std::string entity;
  std::string rule;
  std::string detail;

  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

namespace rules {
inline constexpr const char* kDuplicateId = "duplicate id";
inline constexpr const char* kUnknownZone = "unknown zone";
inline constexpr const char* kNegativeDemand = "negative demand";
inline constexpr const char* kPminAbovePmax = "p_min>p_max";
inline constexpr const char* kSelfLoop = "from_zone==to_zone";
inline constexpr const char* kNegativeAtc = "negative atc";
inline constexpr const char* kAtcExceedsRating = "atc exceeds rating";
inline constexpr const char* kNonPositiveRating = "rating<=0";
inline constexpr const char* kNegativeQuadA = "quad_a<0";
inline constexpr const char* kNegativeQuadC = "quad_c<0";
inline constexpr const char* kSegmentGrid = "segment grid";
inline constexpr const char* kSegmentSlopes = "segment slopes not increasing";
inline constexpr const char* kSupplyShortfall = "supply shortfall";
}  // namespace rules

/// Lists every invariant violation of the instance. Never throws.
ValidationReport validate_instance(const MarketInstance& instance);

/// Invariant checks for a loss model attached to a line of the given rating.
void validate_loss_model(const LossModel& model, double rated_capacity, const std::string& entity,
                         ValidationReport& report);

/// Clamps negative ATC values to zero. Returns one warning per clamped direction.
std::vector<std::string> clamp_negative_atc(MarketInstance& instance);

}  // namespace zonalloss

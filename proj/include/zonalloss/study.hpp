#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "zonalloss/calibration.hpp"
#include "zonalloss/formulation.hpp"
#include "zonalloss/market.hpp"

namespace zonalloss {

enum class ScenarioId {
  S1_NoLF,             // two-pass fixed losses on every line with a loss model
  S2_LinearHVDC,       // linear factors on HVDC, two-pass estimates on AC
  S3_PiecewiseHVDC,    // piecewise factors on HVDC, two-pass estimates on AC
  S4_LinearACHVDC,     // linear factors on every line with a loss model
  S5_PiecewiseACHVDC,  // piecewise factors on every line with a loss model
};

inline constexpr ScenarioId kAllScenarios[] = {ScenarioId::S1_NoLF, ScenarioId::S2_LinearHVDC,
                                               ScenarioId::S3_PiecewiseHVDC, ScenarioId::S4_LinearACHVDC,
                                               ScenarioId::S5_PiecewiseACHVDC};

std::string to_string(ScenarioId id);
/// Accepts "S3" or "S3_PiecewiseHVDC".
ScenarioId scenario_from_string(const std::string& text);

struct StudyConfig {
  int workers = 1;
  MilpOptions milp;
};

/// Lines whose losses a scenario models with loss factors, and lines it handles by
/// two-pass estimation. Only lines carrying a loss model are ever selected.
struct ScenarioSelection {
  LossTreatment treatment = LossTreatment::FixedLosses;
  std::set<std::string> factor_lines;
  std::set<std::string> estimated_lines;
};

ScenarioSelection scenario_selection(const MarketInstance& instance, ScenarioId id);

/// Solves Lossless and returns the quadratic loss at the resulting flow of each listed line.
/// Throws StatusNotOptimal when the lossless clearing fails.
std::map<std::string, double> estimate_fixed_losses(const MarketInstance& instance,
                                                    const std::set<std::string>& lines,
                                                    const SolverBackend& backend = builtin_backend());

/// The formulation a scenario clears an hour with. Runs the lossless first pass when the
/// scenario estimates losses of some lines, and reports its flows in `first_pass_flow`.
/// Throws StatusNotOptimal when the first pass fails.
FormulationSpec scenario_spec(const MarketInstance& instance, ScenarioId id,
                              const SolverBackend& backend = builtin_backend(),
                              std::vector<double>* first_pass_flow = nullptr);

struct HourResult {
  int hour = 0;
  SolveStatus status = SolveStatus::Infeasible;
  std::string diagnostic;              // set when the hour was skipped
  DispatchResult dispatch;
  std::vector<double> expost_loss;     // MW per interconnector, quadratic model at cleared flow
  std::vector<double> first_pass_flow; // lossless flows behind the estimates (empty if none)
  bool fixed_point = true;             // second-pass flows equal first-pass flows on estimated lines
  double solve_seconds = 0.0;

  bool solved() const { return status == SolveStatus::Optimal; }
};

struct ScenarioResult {
  ScenarioId id = ScenarioId::S1_NoLF;
  std::vector<std::string> line_ids;
  std::vector<LineKind> line_kinds;
  std::vector<std::string> line_from;
  std::vector<std::string> line_to;
  std::vector<bool> line_has_model;
  std::vector<std::string> zone_ids;
  std::vector<HourResult> hours;  // sorted by hour

  int skipped_hours() const;
  int non_fixed_point_hours() const;
};

/// Attaches factors to every line with a loss model: linear factors from `linear` when
/// present for the line (lines already carrying linear factors keep them), and piecewise
/// factors of `segment_mw` when it is positive.
void calibrate_series(std::vector<MarketInstance>& series, const std::map<std::string, LinearFactors>& linear,
                      double segment_mw);

/// Clears every hour of the series under the scenario. Hours run on `config.workers`
/// threads and are sorted by hour afterwards. Hours that fail to solve are kept with
/// their status and a diagnostic. Throws CalibrationMissing before solving anything if a
/// selected line lacks the factors the scenario needs. Without a backend the built-in
/// branch-and-bound runs with `config.milp`.
ScenarioResult run_scenario(const std::vector<MarketInstance>& series, ScenarioId id, const StudyConfig& config = {},
                            const SolverBackend* backend = nullptr);

struct ScenarioSummary {
  ScenarioId id = ScenarioId::S1_NoLF;
  int hours_solved = 0;
  int hours_skipped = 0;
  int non_fixed_point_hours = 0;
  double hvdc_loss_gwh = 0.0;
  double ac_loss_gwh = 0.0;
  double total_loss_gwh = 0.0;
  double system_cost_meur = 0.0;
  double delta_hvdc_gwh = 0.0;
  double delta_ac_gwh = 0.0;
  double delta_total_gwh = 0.0;
  double delta_hvdc_pct = 0.0;
  double delta_ac_pct = 0.0;
  double delta_total_pct = 0.0;
  double savings_meur = 0.0;  // reference cost minus scenario cost
};

struct HourDetail {
  ScenarioId id = ScenarioId::S1_NoLF;
  int hour = 0;
  SolveStatus status = SolveStatus::Infeasible;
  double system_cost_eur = 0.0;
  double hvdc_loss_mw = 0.0;
  double ac_loss_mw = 0.0;
};

struct StudyReport {
  ScenarioId reference = ScenarioId::S1_NoLF;
  int hours = 0;         // length of the series
  int common_hours = 0;  // hours solved by every scenario; aggregates cover these only
  std::vector<ScenarioSummary> scenarios;
  std::vector<HourDetail> detail;
};

/// Aggregates and deltas against `reference`, which must be among the results.
/// Throws SeriesMismatch when the results cover different hours.
StudyReport compare_scenarios(const std::vector<ScenarioResult>& results, ScenarioId reference);

struct LineLossCost {
  std::string line_id;
  LineKind kind = LineKind::AC;
  std::string from_zone;
  std::string to_zone;
  int hours = 0;
  int zero_price_diff_hours = 0;
  double loss_cost_eur = 0.0;  // zero-price-difference hours only
  double from_share_eur = 0.0;
  double to_share_eur = 0.0;
};

/// Per line with a loss model: hours without a price difference and the cost of their
/// ex-post losses at the mean endpoint price, split evenly between the endpoint TSOs.
std::vector<LineLossCost> tso_loss_cost_accounting(const ScenarioResult& result);

inline constexpr double kZeroPriceDiff = 1e-6;

void write_report_csv(std::ostream& out, const StudyReport& report);
/// `accounting`, when given, is aligned with `report.scenarios`.
void write_report_json(std::ostream& out, const StudyReport& report,
                       const std::vector<std::vector<LineLossCost>>& accounting = {});
/// One row per scenario and hour.
void write_detail_csv(std::ostream& out, const StudyReport& report);
void write_accounting_csv(std::ostream& out, ScenarioId id, const std::vector<LineLossCost>& rows);
/// Per-hour, per-line detail. Gzip-compressed when `path` ends in ".gz".
void write_hourly_detail(const std::string& path, const std::vector<ScenarioResult>& results);

}  // namespace zonalloss

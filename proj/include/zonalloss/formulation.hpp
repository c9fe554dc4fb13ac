#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "zonalloss/canonical_problem.hpp"
#include "zonalloss/market.hpp"
#include "zonalloss/milp.hpp"

namespace zonalloss {

/// How losses of the selected lines enter the clearing problem.
enum class LossTreatment {
  Lossless,         // flows bounded by ATC, no loss terms
  FixedLosses,      // loss estimates added to endpoint demand
  LinearLF,         // alpha*(f+ + f-) + beta with a direction binary
  PiecewiseLF,      // segment loss factors with ordered segment binaries
  RelaxedLinearLF,  // loss >= alpha*|f| + beta as two inequalities, no binaries
};

std::string to_string(LossTreatment treatment);

struct FormulationSpec {
  LossTreatment variant = LossTreatment::Lossless;
  /// Lines whose losses are modeled by loss factors. Ignored for Lossless/FixedLosses.
  std::set<std::string> lf_selection;
  /// Price-independent loss estimates (MW) split 50/50 over the endpoint zones.
  /// Usable with every variant for lines outside the selection.
  std::map<std::string, double> fixed_losses;

  static FormulationSpec lossless() { return {}; }
  static FormulationSpec fixed(std::map<std::string, double> estimates) {
    return {LossTreatment::FixedLosses, {}, std::move(estimates)};
  }
  static FormulationSpec with_factors(LossTreatment variant, std::set<std::string> selection,
                                      std::map<std::string, double> estimates = {}) {
    return {variant, std::move(selection), std::move(estimates)};
  }
};

/// Variable indices of one interconnector inside the canonical problem.
struct LineSymbols {
  LossTreatment treatment = LossTreatment::Lossless;
  Index flow = -1;
  Index flow_pos = -1;  // LinearLF
  Index flow_neg = -1;
  Index direction = -1;
  Index loss = -1;  // any loss-factor treatment
  std::vector<Index> segment_pos;  // PiecewiseLF
  std::vector<Index> segment_neg;
  std::vector<Index> indicator_pos;
  std::vector<Index> indicator_neg;
  double fixed_loss = 0.0;
};

/// Canonical problem plus the symbol table mapping it back to market entities.
struct ClearingProblem {
  CanonicalProblem problem;
  MarketInstance instance;
  FormulationSpec spec;
  std::vector<Index> generation;    // per generator
  std::vector<LineSymbols> lines;   // per interconnector
  std::vector<Index> balance_rows;  // per zone
  std::vector<std::string> variable_names;
  std::vector<std::string> row_names;
};

struct DispatchResult {
  int hour = 0;
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> generation;     // MW per generator
  std::vector<double> flow;           // signed MW per interconnector
  std::vector<double> flow_pos;       // MW per interconnector, forward part
  std::vector<double> flow_neg;       // MW per interconnector, reverse part
  std::vector<double> modeled_loss;   // MW per interconnector (0 unless loss factors apply)
  std::vector<bool> loss_modeled;     // true where modeled_loss comes from loss factors
  std::vector<double> fixed_loss;     // MW estimate injected per interconnector
  std::vector<double> zonal_price;    // EUR/MWh per zone
  double objective = 0.0;             // EUR for the hour
  long nodes = 0;
};

/// Pluggable MILP engine. The built-in branch-and-bound is the default.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual Solution solve(const CanonicalProblem& problem) const = 0;
  virtual Solution solve_fixed(const CanonicalProblem& problem, std::span<const double> binaries) const = 0;
};

class BuiltinBackend : public SolverBackend {
 public:
  explicit BuiltinBackend(MilpOptions options = {}) : options_(options) {}
  Solution solve(const CanonicalProblem& problem) const override { return solve_milp(problem, options_); }
  Solution solve_fixed(const CanonicalProblem& problem, std::span<const double> binaries) const override {
    return duals_at_fixed_binaries(problem, binaries, options_.lp);
  }

 private:
  MilpOptions options_;
};

const SolverBackend& builtin_backend();

/// Throws UncalibratedLine, SegmentGridMismatch, or Error for an inconsistent spec.
ClearingProblem build_problem(const MarketInstance& instance, const FormulationSpec& spec);

/// Maps an optimal solution back to market quantities. MILP solutions without duals are
/// re-solved with their binaries fixed to obtain zonal prices. Throws StatusNotOptimal.
DispatchResult extract_result(const ClearingProblem& problem, const Solution& solution,
                              const SolverBackend& backend = builtin_backend());

/// build_problem + solve + extract_result. Non-optimal solves return a result with the
/// solver status and empty vectors.
DispatchResult clear(const MarketInstance& instance, const FormulationSpec& spec,
                     const SolverBackend& backend = builtin_backend());

/// Sum of cost * generation.
double generation_cost(const MarketInstance& instance, const DispatchResult& result);

/// Per zone: generation + fixed injection - demand + net import. Equals the share of
/// line losses the zone's balance carries.
std::vector<double> zone_loss_allocation(const MarketInstance& instance, const DispatchResult& result);

/// Per zone: half of every incident line's modeled and fixed loss.
std::vector<double> expected_zone_losses(const MarketInstance& instance, const DispatchResult& result);

}  // namespace zonalloss

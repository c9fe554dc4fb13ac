#include "zonalloss/formulation.hpp"

#include <algorithm>
#include <cmath>

#include "zonalloss/errors.hpp"

namespace zonalloss {

std::string to_string(LossTreatment treatment) {
  switch (treatment) {
    case LossTreatment::Lossless: return "Lossless";
    case LossTreatment::FixedLosses: return "FixedLosses";
    case LossTreatment::LinearLF: return "LinearLF";
    case LossTreatment::PiecewiseLF: return "PiecewiseLF";
    case LossTreatment::RelaxedLinearLF: return "RelaxedLinearLF";
  }
  return "?";
}

const SolverBackend& builtin_backend() {
  static const BuiltinBackend backend;
  return backend;
}

namespace {

using Terms = std::vector<std::pair<Index, double>>;

constexpr double kGridTol = 1e-9;

class Builder {
 public:
  Builder(const MarketInstance& instance, const FormulationSpec& spec) {
    out_.instance = instance;
    out_.spec = spec;
  }

  ClearingProblem build() {
    const auto& inst = out_.instance;
    check_spec();
    balance_terms_.resize(inst.zones.size());
    balance_rhs_.resize(inst.zones.size());
    for (std::size_t z = 0; z < inst.zones.size(); ++z)
      balance_rhs_[z] = inst.zones[z].demand - inst.zones[z].fixed_injection;

    for (std::size_t g = 0; g < inst.generators.size(); ++g) {
      const auto& gen = inst.generators[g];
      const Index j = var(gen.p_min, gen.p_max, gen.cost, "g[" + gen.id + "]");
      out_.generation.push_back(j);
      balance_terms_[zone(gen.zone)].emplace_back(j, 1.0);
    }

    for (const auto& line : inst.interconnectors) add_line(line);

    for (std::size_t z = 0; z < inst.zones.size(); ++z)
      out_.balance_rows.push_back(
          row(std::move(balance_terms_[z]), Relation::Equal, balance_rhs_[z], "balance[" + inst.zones[z].id + "]"));
    return std::move(out_);
  }

 private:
  void check_spec() const {
    const auto& inst = out_.instance;
    const auto& spec = out_.spec;
    for (const auto& [id, est] : spec.fixed_losses) {
      if (inst.line_index(id) < 0) throw Error("fixed loss estimate for unknown line " + id);
      if (est < 0.0) throw Error("fixed loss estimate for " + id + " is negative");
    }
    const bool factors = spec.variant == LossTreatment::LinearLF || spec.variant == LossTreatment::PiecewiseLF ||
                         spec.variant == LossTreatment::RelaxedLinearLF;
    if (!factors) return;
    for (const auto& id : spec.lf_selection) {
      const int l = inst.line_index(id);
      if (l < 0) throw Error("loss-factor selection names unknown line " + id);
      if (spec.fixed_losses.count(id)) throw Error("line " + id + " has both loss factors and a fixed estimate");
      const auto& line = inst.interconnectors[l];
      if (!line.loss_model) throw UncalibratedLine("line " + id + " has no loss model");
      if (spec.variant == LossTreatment::PiecewiseLF) {
        const auto& segs = line.loss_model->piecewise;
        if (segs.empty()) throw UncalibratedLine("line " + id + " has no piecewise factors");
        if (std::abs(segs.back().hi - line.rated_capacity) > kGridTol * std::max(1.0, line.rated_capacity))
          throw SegmentGridMismatch("line " + id + ": last segment ends at " + std::to_string(segs.back().hi) +
                                    " instead of the rating " + std::to_string(line.rated_capacity));
      } else if (!line.loss_model->linear) {
        throw UncalibratedLine("line " + id + " has no linear factors");
      }
    }
  }

  std::size_t zone(const std::string& id) const { return static_cast<std::size_t>(out_.instance.zone_index(id)); }

  Index var(double lo, double hi, double cost, std::string name) {
    out_.variable_names.push_back(std::move(name));
    return out_.problem.add_variable(lo, hi, cost);
  }

  Index binary(std::string name) {
    out_.variable_names.push_back(std::move(name));
    return out_.problem.add_binary();
  }

  Index row(Terms terms, Relation rel, double rhs, std::string name) {
    out_.row_names.push_back(std::move(name));
    return out_.problem.add_row(std::move(terms), rel, rhs);
  }

  LossTreatment treatment_of(const Interconnector& line) const {
    const auto& spec = out_.spec;
    switch (spec.variant) {
      case LossTreatment::LinearLF:
      case LossTreatment::PiecewiseLF:
      case LossTreatment::RelaxedLinearLF:
        return spec.lf_selection.count(line.id) ? spec.variant : LossTreatment::Lossless;
      default: return LossTreatment::Lossless;
    }
  }

  void add_line(const Interconnector& line) {
    LineSymbols sym;
    sym.treatment = treatment_of(line);
    const std::size_t from = zone(line.from_zone);
    const std::size_t to = zone(line.to_zone);
    const std::string tag = "[" + line.id + "]";

    sym.flow = var(-line.atc_rev, line.atc_fwd, 0.0, "f" + tag);
    balance_terms_[from].emplace_back(sym.flow, -1.0);
    balance_terms_[to].emplace_back(sym.flow, 1.0);

    if (auto it = out_.spec.fixed_losses.find(line.id); it != out_.spec.fixed_losses.end()) {
      sym.fixed_loss = it->second;
      balance_rhs_[from] += 0.5 * it->second;
      balance_rhs_[to] += 0.5 * it->second;
    }

    switch (sym.treatment) {
      case LossTreatment::LinearLF: add_linear(line, tag, sym); break;
      case LossTreatment::PiecewiseLF: add_piecewise(line, tag, sym); break;
      case LossTreatment::RelaxedLinearLF: add_relaxed(line, tag, sym); break;
      default: break;
    }
    if (sym.loss >= 0) {
      balance_terms_[from].emplace_back(sym.loss, -0.5);
      balance_terms_[to].emplace_back(sym.loss, -0.5);
    }
    out_.lines.push_back(std::move(sym));
  }

  void add_linear(const Interconnector& line, const std::string& tag, LineSymbols& sym) {
    const auto& lf = *line.loss_model->linear;
    sym.flow_pos = var(0.0, line.atc_fwd, 0.0, "f+" + tag);
    sym.flow_neg = var(0.0, line.atc_rev, 0.0, "f-" + tag);
    sym.direction = binary("u" + tag);
    const double top = std::abs(lf.alpha) * (line.atc_fwd + line.atc_rev) + std::abs(lf.beta);
    sym.loss = var(-top, top, 0.0, "loss" + tag);
    row({{sym.flow, 1.0}, {sym.flow_pos, -1.0}, {sym.flow_neg, 1.0}}, Relation::Equal, 0.0, "flow" + tag);
    row({{sym.flow_pos, 1.0}, {sym.direction, -line.atc_fwd}}, Relation::LessEqual, 0.0, "fwd" + tag);
    row({{sym.flow_neg, 1.0}, {sym.direction, line.atc_rev}}, Relation::LessEqual, line.atc_rev, "rev" + tag);
    row({{sym.loss, 1.0}, {sym.flow_pos, -lf.alpha}, {sym.flow_neg, -lf.alpha}}, Relation::Equal, lf.beta,
        "loss" + tag);
  }

  void add_relaxed(const Interconnector& line, const std::string& tag, LineSymbols& sym) {
    const auto& lf = *line.loss_model->linear;
    const double top = std::abs(lf.alpha) * (line.atc_fwd + line.atc_rev) + std::abs(lf.beta);
    sym.loss = var(-top, top, 0.0, "loss" + tag);
    row({{sym.loss, 1.0}, {sym.flow, -lf.alpha}}, Relation::GreaterEqual, lf.beta, "loss+" + tag);
    row({{sym.loss, 1.0}, {sym.flow, lf.alpha}}, Relation::GreaterEqual, lf.beta, "loss-" + tag);
  }

  void add_piecewise(const Interconnector& line, const std::string& tag, LineSymbols& sym) {
    const auto& segs = line.loss_model->piecewise;
    const std::size_t k_count = segs.size();

    double top = 0.0;
    for (const auto& s : segs)
      top = std::max({top, std::abs(s.alpha * s.hi + s.beta), std::abs(s.alpha * s.lo + s.beta)});
    top *= 2.0;

    Terms flow_terms{{sym.flow, 1.0}};
    Terms loss_terms;
    for (int side = 0; side < 2; ++side) {
      const bool pos = side == 0;
      const char* sign = pos ? "+" : "-";
      auto& seg_vars = pos ? sym.segment_pos : sym.segment_neg;
      auto& ind_vars = pos ? sym.indicator_pos : sym.indicator_neg;
      for (std::size_t k = 0; k < k_count; ++k) {
        const std::string idx = tag + "[" + std::to_string(k + 1) + "]";
        seg_vars.push_back(var(0.0, segs[k].hi, 0.0, std::string("f") + sign + idx));
        ind_vars.push_back(binary(std::string("u") + sign + idx));
      }
      Terms atc_terms;
      for (std::size_t k = 0; k < k_count; ++k) {
        const std::string idx = tag + "[" + std::to_string(k + 1) + "]";
        const Index fk = seg_vars[k];
        const Index uk = ind_vars[k];
        const bool last = k + 1 == k_count;
        const double hi = segs[k].hi;
        const double lo = segs[k].lo;
        // Segment k is active when u_k - u_{k+1} = 1 (u_K alone for the last segment).
        Terms upper{{fk, 1.0}, {uk, -hi}};
        if (!last) upper.emplace_back(ind_vars[k + 1], hi);
        row(std::move(upper), Relation::LessEqual, 0.0, std::string("seg_hi") + sign + idx);
        if (lo > 0.0) {
          Terms lower{{fk, 1.0}, {uk, -lo}};
          if (!last) lower.emplace_back(ind_vars[k + 1], lo);
          row(std::move(lower), Relation::GreaterEqual, 0.0, std::string("seg_lo") + sign + idx);
        }
        if (!last)
          row({{uk, 1.0}, {ind_vars[k + 1], -1.0}}, Relation::GreaterEqual, 0.0, std::string("order") + sign + idx);

        flow_terms.emplace_back(fk, pos ? -1.0 : 1.0);
        atc_terms.emplace_back(fk, 1.0);
        loss_terms.emplace_back(fk, -segs[k].alpha);
        const double step = k == 0 ? segs[0].beta : segs[k].beta - segs[k - 1].beta;
        if (step != 0.0) loss_terms.emplace_back(uk, -step);
      }
      row(std::move(atc_terms), Relation::LessEqual, pos ? line.atc_fwd : line.atc_rev,
          std::string("atc") + sign + tag);
    }
    row(std::move(flow_terms), Relation::Equal, 0.0, "flow" + tag);
    row({{sym.indicator_pos.front(), 1.0}, {sym.indicator_neg.front(), 1.0}}, Relation::LessEqual, 1.0,
        "direction" + tag);

    sym.loss = var(-top, top, 0.0, "loss" + tag);
    loss_terms.emplace_back(sym.loss, 1.0);
    row(std::move(loss_terms), Relation::Equal, 0.0, "loss" + tag);
  }

  ClearingProblem out_;
  std::vector<Terms> balance_terms_;
  std::vector<double> balance_rhs_;
};

}  // namespace

ClearingProblem build_problem(const MarketInstance& instance, const FormulationSpec& spec) {
  return Builder(instance, spec).build();
}

DispatchResult extract_result(const ClearingProblem& cp, const Solution& solution, const SolverBackend& backend) {
  if (solution.status != SolveStatus::Optimal)
    throw StatusNotOptimal("cannot extract a dispatch from a " + to_string(solution.status) + " solution");

  const Solution* sol = &solution;
  Solution fixed;
  if (!solution.duals) {
    const auto values = binary_values(cp.problem, solution.x);
    fixed = backend.solve_fixed(cp.problem, values);
    if (fixed.status != SolveStatus::Optimal)
      throw StatusNotOptimal("fixed-binary re-solve returned " + to_string(fixed.status));
    sol = &fixed;
  }
  const auto& x = sol->x;
  const auto& inst = cp.instance;

  DispatchResult r;
  r.hour = inst.hour;
  r.status = SolveStatus::Optimal;
  r.objective = sol->objective;
  r.nodes = solution.nodes;
  for (Index j : cp.generation) r.generation.push_back(x[j]);

  const std::size_t n_lines = cp.lines.size();
  r.flow.resize(n_lines);
  r.flow_pos.resize(n_lines);
  r.flow_neg.resize(n_lines);
  r.modeled_loss.assign(n_lines, 0.0);
  r.loss_modeled.assign(n_lines, false);
  r.fixed_loss.resize(n_lines);
  for (std::size_t l = 0; l < n_lines; ++l) {
    const auto& sym = cp.lines[l];
    double pos = 0.0;
    double neg = 0.0;
    switch (sym.treatment) {
      case LossTreatment::LinearLF:
        pos = x[sym.flow_pos];
        neg = x[sym.flow_neg];
        break;
      case LossTreatment::PiecewiseLF:
        for (Index j : sym.segment_pos) pos += x[j];
        for (Index j : sym.segment_neg) neg += x[j];
        break;
      default:
        pos = std::max(0.0, x[sym.flow]);
        neg = std::max(0.0, -x[sym.flow]);
        break;
    }
    r.flow[l] = x[sym.flow];
    r.flow_pos[l] = pos;
    r.flow_neg[l] = neg;
    if (sym.loss >= 0) {
      r.modeled_loss[l] = x[sym.loss];
      r.loss_modeled[l] = true;
    }
    r.fixed_loss[l] = sym.fixed_loss;
  }
  for (Index row : cp.balance_rows) r.zonal_price.push_back((*sol->duals)[row]);
  return r;
}

DispatchResult clear(const MarketInstance& instance, const FormulationSpec& spec, const SolverBackend& backend) {
  const ClearingProblem cp = build_problem(instance, spec);
  const Solution sol = backend.solve(cp.problem);
  if (sol.status != SolveStatus::Optimal) {
    DispatchResult r;
    r.hour = instance.hour;
    r.status = sol.status;
    r.nodes = sol.nodes;
    return r;
  }
  return extract_result(cp, sol, backend);
}

double generation_cost(const MarketInstance& instance, const DispatchResult& result) {
  double total = 0.0;
  for (std::size_t g = 0; g < instance.generators.size(); ++g) total += instance.generators[g].cost * result.generation[g];
  return total;
}

std::vector<double> zone_loss_allocation(const MarketInstance& instance, const DispatchResult& result) {
  std::vector<double> alloc(instance.zones.size());
  for (std::size_t z = 0; z < instance.zones.size(); ++z)
    alloc[z] = instance.zones[z].fixed_injection - instance.zones[z].demand;
  for (std::size_t g = 0; g < instance.generators.size(); ++g)
    alloc[instance.zone_index(instance.generators[g].zone)] += result.generation[g];
  for (std::size_t l = 0; l < instance.interconnectors.size(); ++l) {
    const auto& line = instance.interconnectors[l];
    alloc[instance.zone_index(line.from_zone)] -= result.flow[l];
    alloc[instance.zone_index(line.to_zone)] += result.flow[l];
  }
  return alloc;
}

std::vector<double> expected_zone_losses(const MarketInstance& instance, const DispatchResult& result) {
  std::vector<double> share(instance.zones.size(), 0.0);
  for (std::size_t l = 0; l < instance.interconnectors.size(); ++l) {
    const auto& line = instance.interconnectors[l];
    const double loss = result.modeled_loss[l] + result.fixed_loss[l];
    share[instance.zone_index(line.from_zone)] += 0.5 * loss;
    share[instance.zone_index(line.to_zone)] += 0.5 * loss;
  }
  return share;
}

}  // namespace zonalloss

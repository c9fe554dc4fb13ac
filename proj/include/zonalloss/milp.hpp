#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <span>
#include <vector>

#include "zonalloss/canonical_problem.hpp"
#include "zonalloss/simplex.hpp"

namespace zonalloss {

struct MilpOptions {
  SimplexOptions lp;
  double absolute_gap = 1e-6;
  double integrality_tol = 1e-6;
  long node_limit = 1'000'000;
};

/// LP solve ignoring the binary markers. Duals are populated on Optimal.
template <typename Scalar>
SolutionT<Scalar> solve_lp(const CanonicalProblemT<Scalar>& problem, const SimplexOptions& options = {}) {
  problem.validate();
  BoundedPrimalSimplex<Scalar> simplex(problem, options);
  return simplex.solve();
}

namespace detail {

template <typename Scalar>
bool is_integral(const CanonicalProblemT<Scalar>& problem, const VectorX<Scalar>& x, double tol) {
  for (Index j : problem.binaries)
    if (std::abs(x[j] - std::round(x[j])) > tol) return false;
  return true;
}

/// Most fractional binary; ties go to the lowest index. -1 when integral.
template <typename Scalar>
Index branching_variable(const CanonicalProblemT<Scalar>& problem, const VectorX<Scalar>& x, double tol) {
  Index best = -1;
  Scalar best_score = -1;
  for (Index j : problem.binaries) {
    const Scalar frac = x[j] - std::floor(x[j]);
    if (frac <= tol || frac >= 1 - tol) continue;
    const Scalar score = std::min(frac, Scalar(1) - frac);
    if (score > best_score || (score == best_score && j < best)) {
      best_score = score;
      best = j;
    }
  }
  return best;
}

}  // namespace detail

/// Branch-and-bound over the binary variables with best-bound node selection.
/// Children are re-solved from their parent's optimal basis and solved when created so
/// the queue is ordered by their own bounds. The returned incumbent carries no duals;
/// use duals_at_fixed_binaries for prices.
template <typename Scalar>
SolutionT<Scalar> solve_milp(const CanonicalProblemT<Scalar>& problem, const MilpOptions& options = {}) {
  problem.validate();
  using Simplex = BoundedPrimalSimplex<Scalar>;
  Simplex simplex(problem, options.lp);
  if (problem.binaries.empty()) return simplex.solve();

  struct Node {
    Scalar bound;
    long depth;
    long seq;
    std::vector<Scalar> lower;
    std::vector<Scalar> upper;
    VectorX<Scalar> x;
    typename Simplex::Basis basis;
  };
  struct Worse {
    bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
      if (a->bound != b->bound) return a->bound > b->bound;
      if (a->depth != b->depth) return a->depth < b->depth;
      return a->seq > b->seq;
    }
  };

  std::vector<Scalar> root_lo = problem.lower;
  std::vector<Scalar> root_hi = problem.upper;
  for (Index j : problem.binaries) {
    root_lo[j] = std::max(root_lo[j], Scalar(0));
    root_hi[j] = std::min(root_hi[j], Scalar(1));
  }

  SolutionT<Scalar> result;
  long iterations = 0;
  long nodes = 0;
  long seq = 0;
  const Scalar gap = options.absolute_gap;
  bool have_incumbent = false;
  Scalar incumbent_obj = 0;

  std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, Worse> open;

  // Solves a node; integral solutions update the incumbent, fractional ones are queued.
  auto evaluate = [&](std::vector<Scalar> lo, std::vector<Scalar> hi, long depth,
                      const typename Simplex::Basis* warm) -> SolveStatus {
    if (++nodes > options.node_limit) throw NodeLimitExceeded("branch-and-bound exceeded the node limit");
    SolutionT<Scalar> lp = warm ? simplex.solve_from(*warm, lo, hi) : simplex.solve(lo, hi);
    iterations += lp.iterations;
    if (lp.status != SolveStatus::Optimal) return lp.status;
    if (have_incumbent && lp.objective >= incumbent_obj - gap) return SolveStatus::Optimal;
    if (detail::is_integral(problem, lp.x, options.integrality_tol)) {
      have_incumbent = true;
      incumbent_obj = lp.objective;
      result.x = lp.x;
      result.objective = lp.objective;
      return SolveStatus::Optimal;
    }
    open.push(std::make_shared<Node>(
        Node{lp.objective, depth, seq++, std::move(lo), std::move(hi), std::move(lp.x), simplex.basis()}));
    return SolveStatus::Optimal;
  };

  const SolveStatus root = evaluate(root_lo, root_hi, 0, nullptr);
  if (root != SolveStatus::Optimal) {
    result.status = root;
    result.iterations = iterations;
    result.nodes = nodes;
    return result;
  }

  while (!open.empty()) {
    auto node = open.top();
    open.pop();
    if (have_incumbent && node->bound >= incumbent_obj - gap) break;
    const Index j = detail::branching_variable(problem, node->x, options.integrality_tol);
    if (j < 0) continue;
    {
      auto lo = node->lower;
      auto hi = node->upper;
      hi[j] = 0;
      const SolveStatus s = evaluate(std::move(lo), std::move(hi), node->depth + 1, &node->basis);
      if (s == SolveStatus::IterationLimit) {
        result.status = s;
        return result;
      }
    }
    {
      auto lo = std::move(node->lower);
      auto hi = std::move(node->upper);
      lo[j] = 1;
      const SolveStatus s = evaluate(std::move(lo), std::move(hi), node->depth + 1, &node->basis);
      if (s == SolveStatus::IterationLimit) {
        result.status = s;
        return result;
      }
    }
  }

  result.iterations = iterations;
  result.nodes = nodes;
  result.status = have_incumbent ? SolveStatus::Optimal : SolveStatus::Infeasible;
  return result;
}

/// LP with every binary fixed to the rounded given value. Duals are populated.
/// Throws InfeasibleFixing when the fixing admits no feasible point.
template <typename Scalar>
SolutionT<Scalar> duals_at_fixed_binaries(const CanonicalProblemT<Scalar>& problem, std::span<const Scalar> binary_values,
                                          const SimplexOptions& options = {}) {
  problem.validate();
  if (binary_values.size() != problem.binaries.size())
    throw MalformedProblem("binary fixing has the wrong length");
  std::vector<Scalar> lo = problem.lower;
  std::vector<Scalar> hi = problem.upper;
  for (std::size_t k = 0; k < problem.binaries.size(); ++k) {
    const Scalar v = std::round(binary_values[k]);
    if (std::abs(binary_values[k] - v) > Scalar(1e-6) || (v != 0 && v != 1))
      throw MalformedProblem("binary fixing is not integral");
    lo[problem.binaries[k]] = v;
    hi[problem.binaries[k]] = v;
  }
  BoundedPrimalSimplex<Scalar> simplex(problem, options);
  SolutionT<Scalar> sol = simplex.solve(lo, hi);
  if (sol.status == SolveStatus::Infeasible) throw InfeasibleFixing("binary fixing admits no feasible point");
  return sol;
}

/// Binary values of a solution in the order of problem.binaries.
template <typename Scalar>
std::vector<Scalar> binary_values(const CanonicalProblemT<Scalar>& problem, const VectorX<Scalar>& x) {
  std::vector<Scalar> v;
  v.reserve(problem.binaries.size());
  for (Index j : problem.binaries) v.push_back(std::round(x[j]));
  return v;
}

}  // namespace zonalloss

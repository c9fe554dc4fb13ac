#pragma once

// Test-only reference solvers. They share no code with the simplex or branch-and-bound.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "zonalloss/canonical_problem.hpp"
#include "zonalloss/market.hpp"
#include "zonalloss/milp.hpp"

namespace zonalloss::testing {

/// Minimum of a tiny LP by enumerating every vertex: each choice of n linearly independent
/// constraints (rows or bounds) taken as active is solved densely and kept when feasible.
/// Returns nullopt when no vertex is feasible.
inline std::optional<double> vertex_enumeration_lp(const CanonicalProblem& p, const std::vector<double>& lower,
                                                   const std::vector<double>& upper, double tol = 1e-7) {
  const int n = static_cast<int>(p.num_variables());
  struct Cand {
    Eigen::VectorXd a;
    double rhs;
  };
  std::vector<Cand> optional;
  for (const auto& row : p.rows) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (const auto& [j, v] : row.terms) a[j] += v;
    optional.push_back({a, row.rhs});
  }
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    optional.push_back({e, lower[j]});
    optional.push_back({e, upper[j]});
  }
  const int need = n;

  auto feasible = [&](const Eigen::VectorXd& x) {
    for (int j = 0; j < n; ++j)
      if (x[j] < lower[j] - tol || x[j] > upper[j] + tol) return false;
    for (const auto& row : p.rows) {
      double act = 0.0;
      for (const auto& [j, v] : row.terms) act += v * x[j];
      if (row.relation == Relation::Equal && std::abs(act - row.rhs) > tol) return false;
      if (row.relation == Relation::LessEqual && act > row.rhs + tol) return false;
      if (row.relation == Relation::GreaterEqual && act < row.rhs - tol) return false;
    }
    return true;
  };

  std::optional<double> best;
  std::vector<int> pick(need);
  const int k = static_cast<int>(optional.size());
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == need) {
      Eigen::MatrixXd m(n, n);
      Eigen::VectorXd b(n);
      int r = 0;
      for (int idx : pick) {
        m.row(r) = optional[idx].a.transpose();
        b[r++] = optional[idx].rhs;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(b);
      if (!feasible(x)) return;
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += p.objective[j] * x[j];
      if (!best || obj < *best) best = obj;
      return;
    }
    for (int i = start; i < k; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Minimum of an LP with finite bounds by a dense two-phase tableau simplex with Bland's
/// rule. Variables with lower == upper are substituted out. Returns nullopt when infeasible.
inline std::optional<double> dense_tableau_lp(const CanonicalProblem& p, const std::vector<double>& lower,
                                              const std::vector<double>& upper, double tol = 1e-9) {
  const int n = static_cast<int>(p.num_variables());
  std::vector<int> col_of(n, -1);
  std::vector<int> var_of;
  double constant = 0.0;
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j])) throw std::invalid_argument("unbounded variable");
    constant += p.objective[j] * lower[j];
    if (upper[j] > lower[j]) {
      col_of[j] = static_cast<int>(var_of.size());
      var_of.push_back(j);
    }
  }
  const int nv = static_cast<int>(var_of.size());

  struct Row {
    std::vector<double> a;
    Relation rel;
    double rhs;
  };
  std::vector<Row> rows;
  for (const auto& row : p.rows) {
    Row r{std::vector<double>(nv, 0.0), row.relation, row.rhs};
    for (const auto& [j, v] : row.terms) {
      r.rhs -= v * lower[j];
      if (col_of[j] >= 0) r.a[col_of[j]] += v;
    }
    rows.push_back(std::move(r));
  }
  for (int k = 0; k < nv; ++k) {
    Row r{std::vector<double>(nv, 0.0), Relation::LessEqual, upper[var_of[k]] - lower[var_of[k]]};
    r.a[k] = 1.0;
    rows.push_back(std::move(r));
  }
  for (auto& r : rows) {
    if (r.rhs >= 0.0) continue;
    for (double& v : r.a) v = -v;
    r.rhs = -r.rhs;
    if (r.rel == Relation::LessEqual) r.rel = Relation::GreaterEqual;
    else if (r.rel == Relation::GreaterEqual) r.rel = Relation::LessEqual;
  }

  const int m = static_cast<int>(rows.size());
  int ns = 0;
  int na = 0;
  for (const auto& r : rows) {
    ns += r.rel != Relation::Equal ? 1 : 0;
    na += r.rel != Relation::LessEqual ? 1 : 0;
  }
  const int nc = nv + ns + na;
  const int rhs = nc;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, nc + 1);
  std::vector<int> basis(m);
  int si = nv;
  int ai = nv + ns;
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < nv; ++k) t(i, k) = rows[i].a[k];
    t(i, rhs) = rows[i].rhs;
    if (rows[i].rel == Relation::LessEqual) {
      t(i, si) = 1.0;
      basis[i] = si++;
    } else {
      if (rows[i].rel == Relation::GreaterEqual) t(i, si++) = -1.0;
      t(i, ai) = 1.0;
      basis[i] = ai++;
    }
  }
  const auto is_art = [&](int c) { return c >= nv + ns; };

  auto pivot = [&](int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < m; ++i)
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    basis[r] = c;
  };

  // Minimizes cost over the current basis; columns with allowed[c] false never enter.
  auto run = [&](const Eigen::VectorXd& cost, const std::vector<bool>& allowed) {
    while (true) {
      int enter = -1;
      for (int c = 0; c < nc && enter < 0; ++c) {
        if (!allowed[c]) continue;
        double d = cost[c];
        for (int i = 0; i < m; ++i) d -= cost[basis[i]] * t(i, c);
        if (d < -tol) enter = c;
      }
      if (enter < 0) return;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (t(i, enter) <= tol) continue;
        const double ratio = t(i, rhs) / t(i, enter);
        if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) throw std::runtime_error("unbounded LP in oracle");
      pivot(leave, enter);
    }
  };

  if (na > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(nc);
    for (int c = nv + ns; c < nc; ++c) phase1[c] = 1.0;
    run(phase1, std::vector<bool>(nc, true));
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
      if (is_art(basis[i])) infeas += t(i, rhs);
    if (infeas > 1e-7) return std::nullopt;
    for (int i = 0; i < m; ++i) {
      if (!is_art(basis[i])) continue;
      for (int c = 0; c < nv + ns; ++c) {
        if (std::abs(t(i, c)) > 1e-9) {
          pivot(i, c);
          break;
        }
      }
    }
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(nc);
  for (int k = 0; k < nv; ++k) cost[k] = p.objective[var_of[k]];
  std::vector<bool> allowed(nc, true);
  for (int c = nv + ns; c < nc; ++c) allowed[c] = false;
  run(cost, allowed);
  double obj = constant;
  for (int i = 0; i < m; ++i) obj += cost[basis[i]] * t(i, rhs);
  return obj;
}

/// Minimum of a MILP by fixing every binary combination and solving each LP with the
/// dense tableau oracle. Requires finite bounds.
inline std::optional<double> enumerate_binaries(const CanonicalProblem& p) {
  const std::size_t nb = p.binaries.size();
  std::optional<double> best;
  for (unsigned long mask = 0; mask < (1ul << nb); ++mask) {
    std::vector<double> lo = p.lower;
    std::vector<double> hi = p.upper;
    for (std::size_t k = 0; k < nb; ++k) {
      const double v = (mask >> k) & 1ul ? 1.0 : 0.0;
      lo[p.binaries[k]] = v;
      hi[p.binaries[k]] = v;
    }
    const auto value = dense_tableau_lp(p, lo, hi);
    if (value && (!best || *value < *best)) best = value;
  }
  return best;
}

/// Random MILP with a known feasible point: rows are built around a random point whose
/// binaries are integral, with random slack on the inequalities.
inline CanonicalProblem random_milp(std::mt19937_64& rng, int n_vars, int n_binaries, int n_rows) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> rel(0, 2);
  CanonicalProblem p;
  Eigen::VectorXd point(n_vars);
  for (int j = 0; j < n_vars; ++j) {
    if (j < n_binaries) {
      p.add_binary(coef(rng));
      point[j] = unit(rng) < 0.5 ? 0.0 : 1.0;
    } else {
      const double lo = -10.0 * unit(rng);
      const double hi = lo + 1.0 + 10.0 * unit(rng);
      p.add_variable(lo, hi, coef(rng));
      point[j] = lo + (hi - lo) * unit(rng);
    }
  }
  for (int i = 0; i < n_rows; ++i) {
    std::vector<std::pair<Index, double>> terms;
    double act = 0.0;
    for (int j = 0; j < n_vars; ++j) {
      if (unit(rng) < 0.5) continue;
      const double a = std::round(coef(rng) * 100.0) / 100.0;
      terms.emplace_back(j, a);
      act += a * point[j];
    }
    const int r = rel(rng);
    if (r == 0) p.add_row(terms, Relation::Equal, act);
    if (r == 1) p.add_row(terms, Relation::LessEqual, act + 2.0 * unit(rng));
    if (r == 2) p.add_row(terms, Relation::GreaterEqual, act - 2.0 * unit(rng));
  }
  return p;
}

}  // namespace zonalloss::testing

namespace zonalloss::testing {

/// Least loss over the disjunctive segment set at signed flow f, with zero loss at zero flow.
/// Breakpoint flows may use either adjacent segment.
inline double segment_loss(const std::vector<LossSegment>& segs, double f) {
  const double x = std::abs(f);
  if (x <= 1e-9) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : segs)
    if (x >= s.lo - 1e-9 && x <= s.hi + 1e-9) best = std::min(best, s.alpha * x + s.beta);
  return best;
}

/// Minimum total segment loss over allocations of `total` MW to parallel lines with limits
/// `caps`, all lines but the last on a `step` MW grid and the last taking the remainder.
inline double grid_min_parallel_loss(const std::vector<std::vector<LossSegment>>& segs,
                                     const std::vector<double>& caps, double total, double step = 1.0) {
  const std::size_t n = segs.size();
  std::vector<double> f(n, 0.0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double, double)> rec = [&](std::size_t i, double remaining, double acc) {
    if (i + 1 == n) {
      if (remaining < -1e-9 || remaining > caps[i] + 1e-9) return;
      best = std::min(best, acc + segment_loss(segs[i], remaining));
      return;
    }
    for (double x = 0.0; x <= std::min(caps[i], remaining) + 1e-9; x += step)
      rec(i + 1, remaining - x, acc + segment_loss(segs[i], x));
  };
  rec(0, total, 0.0);
  return best;
}

}  // namespace zonalloss::testing

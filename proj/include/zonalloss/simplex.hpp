#pragma once

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "zonalloss/canonical_problem.hpp"

namespace zonalloss {

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  /// Phase-one residual above which the problem is declared infeasible.
  double infeasibility_tol = 1e-7;
  int refactor_interval = 64;
  long degenerate_pivots_before_bland = 1000;
  /// Iteration cap is this factor times (variables + rows).
  long iteration_factor = 50;
};

/// Bounded-variable revised primal simplex.
///
/// Rows are turned into equalities with one slack each; slacks of violated rows are
/// replaced in the starting basis by phase-one artificials. The basis inverse is kept
/// as a sparse LU of the last refactorized basis followed by an eta file (product form),
/// refactorized every `refactor_interval` pivots. Pricing is Dantzig's rule with lowest
/// index tie-breaking; Bland's rule takes over during a run of consecutive degenerate pivots.
template <typename Scalar>
class BoundedPrimalSimplex {
 public:
  using Vector = VectorX<Scalar>;

  explicit BoundedPrimalSimplex(const CanonicalProblemT<Scalar>& problem, SimplexOptions options = {})
      : options_(options),
        n_(problem.num_variables()),
        m_(problem.num_rows()),
        a_(problem.matrix()),
        rhs_(m_),
        cost_(n_),
        relation_(m_),
        lower_(problem.lower),
        upper_(problem.upper) {
    for (Index i = 0; i < m_; ++i) {
      rhs_[i] = problem.rows[i].rhs;
      relation_[i] = problem.rows[i].relation;
    }
    for (Index j = 0; j < n_; ++j) cost_[j] = problem.objective[j];
  }

  SolutionT<Scalar> solve() { return solve(lower_, upper_); }

  /// Solves with the structural bounds replaced by `lower`/`upper`.
  SolutionT<Scalar> solve(const std::vector<Scalar>& lower, const std::vector<Scalar>& upper) {
    initialize(lower, upper);
    SolutionT<Scalar> out;
    const long cap = options_.iteration_factor * static_cast<long>(n_ + m_) + 1;

    if (has_artificials_) {
      const SolveStatus s1 = iterate(cap);
      out.iterations = iterations_;
      if (s1 == SolveStatus::IterationLimit) {
        out.status = s1;
        return out;
      }
      refactor();
      Scalar residual = 0;
      for (Index i = 0; i < m_; ++i) residual += x_[n_ + m_ + i];
      if (residual > options_.infeasibility_tol) {
        out.status = SolveStatus::Infeasible;
        return out;
      }
      for (Index i = 0; i < m_; ++i) {
        const Index k = n_ + m_ + i;
        lo_[k] = 0;
        hi_[k] = 0;
        if (state_[k] != State::Basic) x_[k] = 0;
      }
    }

    phase_cost_.setZero();
    phase_cost_.head(n_) = cost_;
    return finish(iterate(cap));
  }

  /// Snapshot of the current basis, valid after a solve that returned Optimal.
  struct Basis {
    std::vector<Index> head;
    std::vector<unsigned char> state;
    Vector diag;
  };

  Basis basis() const {
    Basis b{head_, {}, diag_};
    b.state.reserve(state_.size());
    for (State s : state_) b.state.push_back(static_cast<unsigned char>(s));
    return b;
  }

  /// Re-solves from `start` after the structural bounds changed to `lower`/`upper`.
  /// An optimal basis stays dual feasible under bound changes, so dual simplex pivots
  /// restore primal feasibility; primal pivots then clean up. Falls back to a cold
  /// solve when the warm start stalls or the basis cannot be factorized.
  SolutionT<Scalar> solve_from(const Basis& start, const std::vector<Scalar>& lower, const std::vector<Scalar>& upper) {
    if (static_cast<Index>(start.head.size()) != m_ || static_cast<Index>(start.state.size()) != total())
      return solve(lower, upper);
    if (!load_basis(start, lower, upper)) return solve(lower, upper);
    const long cap = options_.iteration_factor * static_cast<long>(n_ + m_) + 1;
    const SolveStatus s1 = dual_iterate(cap);
    if (s1 == SolveStatus::Infeasible) {
      SolutionT<Scalar> out;
      out.iterations = iterations_;
      out.status = s1;
      return out;
    }
    if (s1 != SolveStatus::Optimal) {
      const long spent = iterations_;
      SolutionT<Scalar> out = solve(lower, upper);
      out.iterations += spent;
      return out;
    }
    return finish(iterate(cap));
  }

 private:
  SolutionT<Scalar> finish(SolveStatus s2) {
    SolutionT<Scalar> out;
    out.iterations = iterations_;
    out.status = s2;
    if (s2 != SolveStatus::Optimal) return out;

    refactor();
    out.x = x_.head(n_);
    for (Index j = 0; j < n_; ++j) {
      // Remove drift for nonbasic variables sitting on a bound.
      if (state_[j] == State::AtLower) out.x[j] = lo_[j];
      if (state_[j] == State::AtUpper) out.x[j] = hi_[j];
    }
    out.objective = cost_.dot(out.x);
    out.duals = basic_duals();
    return out;
  }

  enum class State : unsigned char { Basic, AtLower, AtUpper };

  struct Eta {
    Index row;
    Scalar pivot;
    std::vector<std::pair<Index, Scalar>> entries;
  };

  using LU = Eigen::SparseLU<Eigen::SparseMatrix<Scalar>, Eigen::COLAMDOrdering<int>>;

  static constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  Index total() const { return n_ + 2 * m_; }

  void initialize(const std::vector<Scalar>& lower, const std::vector<Scalar>& upper) {
    const Index nt = total();
    lo_.assign(nt, 0);
    hi_.assign(nt, 0);
    state_.assign(nt, State::AtLower);
    pos_.assign(nt, -1);
    head_.assign(m_, -1);
    x_ = Vector::Zero(nt);
    phase_cost_ = Vector::Zero(nt);
    diag_ = Vector::Ones(m_);
    etas_.clear();
    lu_.reset();
    lut_.reset();
    iterations_ = 0;
    degenerate_ = 0;
    bland_ = false;
    has_artificials_ = false;

    for (Index j = 0; j < n_; ++j) {
      lo_[j] = lower[j];
      hi_[j] = upper[j];
      const bool at_lower = std::abs(lo_[j]) <= std::abs(hi_[j]);
      state_[j] = at_lower ? State::AtLower : State::AtUpper;
      x_[j] = at_lower ? lo_[j] : hi_[j];
    }

    Vector residual = rhs_;
    for (Index j = 0; j < n_; ++j)
      if (x_[j] != 0)
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a_, j); it; ++it)
          residual[it.row()] -= it.value() * x_[j];

    for (Index i = 0; i < m_; ++i) {
      const Index s = n_ + i;
      const Index art = n_ + m_ + i;
      set_slack_bounds(i);
      const Scalar r = residual[i];
      const Scalar tol = options_.feasibility_tol;
      if (r >= lo_[s] - tol && r <= hi_[s] + tol) {
        make_basic(s, i);
        x_[s] = r;
        continue;
      }
      const bool below = r < lo_[s];
      state_[s] = below ? State::AtLower : State::AtUpper;
      x_[s] = below ? lo_[s] : hi_[s];
      const Scalar gap = r - x_[s];
      diag_[i] = gap > 0 ? Scalar(1) : Scalar(-1);
      lo_[art] = 0;
      hi_[art] = kInf;
      make_basic(art, i);
      x_[art] = std::abs(gap);
      phase_cost_[art] = 1;
      has_artificials_ = true;
    }
  }

  void set_slack_bounds(Index i) {
    const Index s = n_ + i;
    switch (relation_[i]) {
      case Relation::Equal: lo_[s] = 0; hi_[s] = 0; break;
      case Relation::LessEqual: lo_[s] = 0; hi_[s] = kInf; break;
      case Relation::GreaterEqual: lo_[s] = -kInf; hi_[s] = 0; break;
    }
  }

  bool load_basis(const Basis& start, const std::vector<Scalar>& lower, const std::vector<Scalar>& upper) {
    const Index nt = total();
    lo_.assign(nt, 0);
    hi_.assign(nt, 0);
    state_.assign(nt, State::AtLower);
    pos_.assign(nt, -1);
    head_ = start.head;
    x_ = Vector::Zero(nt);
    phase_cost_ = Vector::Zero(nt);
    phase_cost_.head(n_) = cost_;
    diag_ = start.diag;
    etas_.clear();
    lu_.reset();
    lut_.reset();
    iterations_ = 0;
    degenerate_ = 0;
    bland_ = false;
    has_artificials_ = false;

    for (Index j = 0; j < n_; ++j) {
      lo_[j] = lower[j];
      hi_[j] = upper[j];
    }
    for (Index i = 0; i < m_; ++i) set_slack_bounds(i);
    for (Index j = 0; j < nt; ++j) {
      State st = static_cast<State>(start.state[j]);
      if (st == State::AtUpper && hi_[j] == kInf) st = State::AtLower;
      if (st == State::AtLower && lo_[j] == -kInf && hi_[j] != kInf) st = State::AtUpper;
      state_[j] = st;
      if (st == State::AtLower) x_[j] = lo_[j] == -kInf ? Scalar(0) : lo_[j];
      if (st == State::AtUpper) x_[j] = hi_[j];
    }
    for (Index i = 0; i < m_; ++i) {
      const Index j = head_[i];
      if (j < 0 || j >= nt || state_[j] != State::Basic || pos_[j] >= 0) return false;
      pos_[j] = i;
    }
    if (m_ == 0) return true;
    refactor();
    return static_cast<bool>(lu_) && etas_.empty();
  }

  // Dual simplex phase: leaves with the most violated basic variable until the basis
  // is primal feasible. Reduced costs that are slightly wrong in sign are clamped.
  SolveStatus dual_iterate(long cap) {
    Vector rho(m_);
    Vector alpha(m_);
    while (true) {
      if (iterations_ >= cap) return SolveStatus::IterationLimit;
      Index r = -1;
      Scalar worst = options_.feasibility_tol;
      bool below = false;
      for (Index i = 0; i < m_; ++i) {
        const Index j = head_[i];
        const Scalar under = lo_[j] - x_[j];
        const Scalar over = x_[j] - hi_[j];
        if (under > worst) {
          worst = under;
          r = i;
          below = true;
        } else if (over > worst) {
          worst = over;
          r = i;
          below = false;
        }
      }
      if (r < 0) return SolveStatus::Optimal;

      const Vector y = basic_duals();
      rho.setZero();
      rho[r] = 1;
      btran(rho);

      Index entering = -1;
      Scalar best_ratio = kInf;
      Scalar best_size = 0;
      for (Index j = 0; j < total(); ++j) {
        if (state_[j] == State::Basic || lo_[j] == hi_[j]) continue;
        const Scalar a = column_dot(j, rho);
        if (std::abs(a) <= options_.pivot_tol) continue;
        const bool free = lo_[j] == -kInf && hi_[j] == kInf;
        // x_r moves by -a per unit increase of x_j.
        const bool can_up = state_[j] == State::AtLower || free;
        const bool can_down = state_[j] == State::AtUpper || free;
        const bool helps = below ? ((can_up && a < 0) || (can_down && a > 0)) : ((can_up && a > 0) || (can_down && a < 0));
        if (!helps) continue;
        const Scalar d = phase_cost_[j] - column_dot(j, y);
        Scalar slack;
        if (free) {
          slack = std::abs(d);
        } else if (state_[j] == State::AtLower) {
          slack = std::max(Scalar(0), d);
        } else {
          slack = std::max(Scalar(0), -d);
        }
        const Scalar ratio = slack / std::abs(a);
        if (ratio < best_ratio || (ratio == best_ratio && std::abs(a) > best_size)) {
          best_ratio = ratio;
          best_size = std::abs(a);
          entering = j;
        }
      }
      if (entering < 0) return SolveStatus::Infeasible;

      scatter_column(entering, alpha);
      ftran(alpha);
      if (std::abs(alpha[r]) <= options_.pivot_tol) return SolveStatus::IterationLimit;

      ++iterations_;
      const Index leaving = head_[r];
      const Scalar target = below ? lo_[leaving] : hi_[leaving];
      const Scalar step = (x_[leaving] - target) / alpha[r];
      for (Index i = 0; i < m_; ++i)
        if (alpha[i] != 0) x_[head_[i]] -= alpha[i] * step;
      x_[entering] += step;

      state_[leaving] = below ? State::AtLower : State::AtUpper;
      x_[leaving] = target;
      pos_[leaving] = -1;
      make_basic(entering, r);

      Eta eta{r, alpha[r], {}};
      for (Index i = 0; i < m_; ++i)
        if (i != r && std::abs(alpha[i]) > Scalar(1e-14)) eta.entries.emplace_back(i, alpha[i]);
      etas_.push_back(std::move(eta));
      if (static_cast<int>(etas_.size()) >= options_.refactor_interval) refactor();
    }
  }

  void make_basic(Index j, Index row) {
    state_[j] = State::Basic;
    pos_[j] = row;
    head_[row] = j;
  }

  Scalar column_dot(Index j, const Vector& y) const {
    if (j < n_) {
      Scalar s = 0;
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a_, j); it; ++it) s += it.value() * y[it.row()];
      return s;
    }
    if (j < n_ + m_) return y[j - n_];
    const Index i = j - n_ - m_;
    return diag_[i] * y[i];
  }

  void scatter_column(Index j, Vector& out) const {
    out.setZero(m_);
    if (j < n_) {
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a_, j); it; ++it) out[it.row()] = it.value();
    } else if (j < n_ + m_) {
      out[j - n_] = 1;
    } else {
      const Index i = j - n_ - m_;
      out[i] = diag_[i];
    }
  }

  // Artificial columns keep the sign chosen at start-up.
  void append_triplets(Index j, Index col, std::vector<Eigen::Triplet<Scalar>>& t) const {
    if (j < n_) {
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a_, j); it; ++it)
        t.emplace_back(it.row(), col, it.value());
    } else if (j < n_ + m_) {
      t.emplace_back(j - n_, col, Scalar(1));
    } else {
      const Index i = j - n_ - m_;
      t.emplace_back(i, col, diag_[i]);
    }
  }

  void ftran(Vector& v) const {
    if (lu_) {
      v = lu_->solve(v).eval();
    } else {
      v = v.cwiseProduct(diag_);
    }
    for (const Eta& e : etas_) {
      const Scalar vr = v[e.row] / e.pivot;
      v[e.row] = vr;
      if (vr != 0)
        for (const auto& [i, a] : e.entries) v[i] -= a * vr;
    }
  }

  void btran(Vector& w) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      Scalar s = w[it->row];
      for (const auto& [i, a] : it->entries) s -= a * w[i];
      w[it->row] = s / it->pivot;
    }
    if (lut_) {
      w = lut_->solve(w).eval();
    } else {
      w = w.cwiseProduct(diag_);
    }
  }

  void refactor() {
    if (m_ == 0) return;
    std::vector<Eigen::Triplet<Scalar>> t;
    for (Index i = 0; i < m_; ++i) append_triplets(head_[i], i, t);
    Eigen::SparseMatrix<Scalar> b(m_, m_);
    b.setFromTriplets(t.begin(), t.end());
    b.makeCompressed();
    auto lu = std::make_unique<LU>();
    lu->compute(b);
    Eigen::SparseMatrix<Scalar> bt = b.transpose();
    bt.makeCompressed();
    auto lut = std::make_unique<LU>();
    lut->compute(bt);
    if (lu->info() != Eigen::Success || lut->info() != Eigen::Success) return;  // keep eta file
    lu_ = std::move(lu);
    lut_ = std::move(lut);
    etas_.clear();

    Vector r = rhs_;
    for (Index j = 0; j < total(); ++j) {
      if (state_[j] == State::Basic || x_[j] == 0) continue;
      if (j < n_) {
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(a_, j); it; ++it)
          r[it.row()] -= it.value() * x_[j];
      } else if (j < n_ + m_) {
        r[j - n_] -= x_[j];
      } else {
        r[j - n_ - m_] -= diag_[j - n_ - m_] * x_[j];
      }
    }
    ftran(r);
    for (Index i = 0; i < m_; ++i) x_[head_[i]] = r[i];
  }

  Vector basic_duals() const {
    Vector w(m_);
    for (Index i = 0; i < m_; ++i) w[i] = phase_cost_[head_[i]];
    btran(w);
    return w;
  }

  SolveStatus iterate(long cap) {
    Vector alpha(m_);
    while (true) {
      if (iterations_ >= cap) return SolveStatus::IterationLimit;
      const Vector y = basic_duals();

      // Pricing.
      Index entering = -1;
      Scalar best = 0;
      int direction = 0;
      for (Index j = 0; j < total(); ++j) {
        if (state_[j] == State::Basic || lo_[j] == hi_[j]) continue;
        const Scalar d = phase_cost_[j] - column_dot(j, y);
        int dir = 0;
        if (state_[j] == State::AtLower && d < -options_.optimality_tol) dir = 1;
        if (state_[j] == State::AtUpper && d > options_.optimality_tol) dir = -1;
        if (dir == 0) continue;
        if (bland_) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          direction = dir;
        }
      }
      if (entering < 0) return SolveStatus::Optimal;

      scatter_column(entering, alpha);
      ftran(alpha);

      // Ratio test: basic x_i moves by delta_i * theta.
      Scalar theta = hi_[entering] - lo_[entering];
      Index leave_row = -1;
      Scalar leave_size = 0;
      for (Index i = 0; i < m_; ++i) {
        const Scalar delta = -direction * alpha[i];
        if (std::abs(delta) <= options_.pivot_tol) continue;
        const Index j = head_[i];
        Scalar limit;
        if (delta < 0) {
          if (lo_[j] == -kInf) continue;
          limit = std::max(Scalar(0), (x_[j] - lo_[j]) / -delta);
        } else {
          if (hi_[j] == kInf) continue;
          limit = std::max(Scalar(0), (hi_[j] - x_[j]) / delta);
        }
        const Scalar size = std::abs(delta);
        bool take = limit < theta;
        if (!take && leave_row >= 0 && limit == theta) {
          take = bland_ ? head_[i] < head_[leave_row] : size > leave_size;
        }
        if (take) {
          theta = limit;
          leave_row = i;
          leave_size = size;
        }
      }
      if (theta == kInf) return SolveStatus::Unbounded;

      ++iterations_;
      if (theta <= Scalar(1e-12)) {
        if (++degenerate_ >= options_.degenerate_pivots_before_bland) bland_ = true;
      } else {
        degenerate_ = 0;
        bland_ = false;
      }

      for (Index i = 0; i < m_; ++i) {
        if (alpha[i] != 0) x_[head_[i]] -= direction * alpha[i] * theta;
      }

      if (leave_row < 0) {
        // Bound flip.
        if (state_[entering] == State::AtLower) {
          state_[entering] = State::AtUpper;
          x_[entering] = hi_[entering];
        } else {
          state_[entering] = State::AtLower;
          x_[entering] = lo_[entering];
        }
        continue;
      }

      const Index leaving = head_[leave_row];
      const bool hit_lower = -direction * alpha[leave_row] < 0;
      state_[leaving] = hit_lower ? State::AtLower : State::AtUpper;
      x_[leaving] = hit_lower ? lo_[leaving] : hi_[leaving];
      pos_[leaving] = -1;

      x_[entering] += direction * theta;
      make_basic(entering, leave_row);

      Eta eta{leave_row, alpha[leave_row], {}};
      for (Index i = 0; i < m_; ++i)
        if (i != leave_row && std::abs(alpha[i]) > Scalar(1e-14)) eta.entries.emplace_back(i, alpha[i]);
      etas_.push_back(std::move(eta));
      if (static_cast<int>(etas_.size()) >= options_.refactor_interval) refactor();
    }
  }

  SimplexOptions options_;
  Index n_;
  Index m_;
  Eigen::SparseMatrix<Scalar> a_;
  Vector rhs_;
  Vector cost_;
  std::vector<Relation> relation_;
  std::vector<Scalar> lower_;
  std::vector<Scalar> upper_;

  std::vector<Scalar> lo_;
  std::vector<Scalar> hi_;
  std::vector<State> state_;
  std::vector<Index> pos_;
  std::vector<Index> head_;
  Vector x_;
  Vector phase_cost_;
  Vector diag_;
  std::vector<Eta> etas_;
  std::unique_ptr<LU> lu_;
  std::unique_ptr<LU> lut_;
  long iterations_ = 0;
  long degenerate_ = 0;
  bool bland_ = false;
  bool has_artificials_ = false;
};

}  // namespace zonalloss

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "zonalloss/errors.hpp"

namespace zonalloss {

using Index = Eigen::Index;

enum class Relation { Equal, LessEqual, GreaterEqual };

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(Relation relation);
std::string to_string(SolveStatus status);

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct LinearRow {
  std::vector<std::pair<Index, Scalar>> terms;
  Relation relation = Relation::Equal;
  Scalar rhs = 0;
};

/// Minimization problem over finitely bounded variables:
///   min c'x  s.t.  rows (=, <=, >=),  lower <= x <= upper,  x_j in {0,1} for j in binaries.
template <typename Scalar>
class CanonicalProblemT {
 public:
  Index add_variable(Scalar lo, Scalar hi, Scalar cost = 0) {
    lower.push_back(lo);
    upper.push_back(hi);
    objective.push_back(cost);
    return static_cast<Index>(objective.size()) - 1;
  }

  Index add_binary(Scalar cost = 0) {
    const Index j = add_variable(0, 1, cost);
    binaries.push_back(j);
    return j;
  }

  Index add_row(std::vector<std::pair<Index, Scalar>> terms, Relation relation, Scalar rhs) {
    rows.push_back({std::move(terms), relation, rhs});
    return static_cast<Index>(rows.size()) - 1;
  }

  Index num_variables() const { return static_cast<Index>(objective.size()); }
  Index num_rows() const { return static_cast<Index>(rows.size()); }

  /// Throws MalformedProblem when bounds are infinite or crossed, or a term index is out of range.
  void validate() const {
    const Index n = num_variables();
    if (static_cast<Index>(lower.size()) != n || static_cast<Index>(upper.size()) != n)
      throw MalformedProblem("bound vectors do not match the variable count");
    for (Index j = 0; j < n; ++j) {
      if (!std::isfinite(static_cast<double>(lower[j])) || !std::isfinite(static_cast<double>(upper[j])))
        throw MalformedProblem("variable " + std::to_string(j) + " has an infinite bound");
      if (lower[j] > upper[j])
        throw MalformedProblem("variable " + std::to_string(j) + " has lower > upper");
      if (!std::isfinite(static_cast<double>(objective[j])))
        throw MalformedProblem("variable " + std::to_string(j) + " has a non-finite cost");
    }
    for (Index i = 0; i < num_rows(); ++i) {
      const auto& row = rows[i];
      if (!std::isfinite(static_cast<double>(row.rhs)))
        throw MalformedProblem("row " + std::to_string(i) + " has a non-finite rhs");
      for (const auto& [j, a] : row.terms) {
        if (j < 0 || j >= n)
          throw MalformedProblem("row " + std::to_string(i) + " references variable " + std::to_string(j));
        if (!std::isfinite(static_cast<double>(a)))
          throw MalformedProblem("row " + std::to_string(i) + " has a non-finite coefficient");
      }
    }
    for (Index j : binaries) {
      if (j < 0 || j >= n) throw MalformedProblem("binary index " + std::to_string(j) + " out of range");
      if (lower[j] < 0 || upper[j] > 1)
        throw MalformedProblem("binary variable " + std::to_string(j) + " has bounds outside [0,1]");
    }
  }

  /// Column-major constraint matrix; duplicate terms are summed.
  Eigen::SparseMatrix<Scalar> matrix() const {
    std::vector<Eigen::Triplet<Scalar>> triplets;
    for (Index i = 0; i < num_rows(); ++i)
      for (const auto& [j, a] : rows[i].terms) triplets.emplace_back(i, j, a);
    Eigen::SparseMatrix<Scalar> a(num_rows(), num_variables());
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
  }

  Scalar evaluate_objective(const VectorX<Scalar>& x) const {
    Scalar value = 0;
    for (Index j = 0; j < num_variables(); ++j) value += objective[j] * x[j];
    return value;
  }

  Scalar row_activity(Index i, const VectorX<Scalar>& x) const {
    Scalar value = 0;
    for (const auto& [j, a] : rows[i].terms) value += a * x[j];
    return value;
  }

  std::vector<Scalar> objective;
  std::vector<Scalar> lower;
  std::vector<Scalar> upper;
  std::vector<LinearRow<Scalar>> rows;
  std::vector<Index> binaries;
};

template <typename Scalar>
struct SolutionT {
  SolveStatus status = SolveStatus::Infeasible;
  VectorX<Scalar> x;
  Scalar objective = 0;
  /// Row duals, d(objective)/d(rhs). Present for LP solves.
  std::optional<VectorX<Scalar>> duals;
  long iterations = 0;
  long nodes = 0;
};

using CanonicalProblem = CanonicalProblemT<double>;
using Solution = SolutionT<double>;

/// Writes the problem in the fixed-point text format described in docs/formats.md.
/// Names are optional; missing entries print as x<j> / r<i>.
void write_problem_dump(std::ostream& out, const CanonicalProblem& problem,
                        const std::vector<std::string>& variable_names = {},
                        const std::vector<std::string>& row_names = {});

}  // namespace zonalloss

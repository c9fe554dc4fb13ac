#include <algorithm>
#include <cstdio>
#include <set>

#include "zonalloss/canonical_problem.hpp"

namespace zonalloss {

std::string to_string(Relation relation) {
  switch (relation) {
    case Relation::Equal: return "=";
    case Relation::LessEqual: return "<=";
    case Relation::GreaterEqual: return ">=";
  }
  return "?";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v == 0.0 ? 0.0 : v);
  return buf;
}

}  // namespace

void write_problem_dump(std::ostream& out, const CanonicalProblem& problem,
                        const std::vector<std::string>& variable_names, const std::vector<std::string>& row_names) {
  const std::set<Index> binaries(problem.binaries.begin(), problem.binaries.end());
  out << "# zonalloss canonical problem v1\n";
  out << "problem " << problem.num_variables() << ' ' << problem.num_rows() << ' ' << binaries.size() << '\n';
  for (Index j = 0; j < problem.num_variables(); ++j) {
    const std::string name =
        j < static_cast<Index>(variable_names.size()) ? variable_names[j] : "x" + std::to_string(j);
    out << "var " << j << ' ' << name << ' ' << fixed(problem.lower[j]) << ' ' << fixed(problem.upper[j]) << ' '
        << fixed(problem.objective[j]) << ' ' << (binaries.count(j) ? 'B' : 'C') << '\n';
  }
  for (Index i = 0; i < problem.num_rows(); ++i) {
    const auto& row = problem.rows[i];
    const std::string name = i < static_cast<Index>(row_names.size()) ? row_names[i] : "r" + std::to_string(i);
    auto terms = row.terms;
    std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    out << "row " << i << ' ' << name << ' ' << to_string(row.relation) << ' ' << fixed(row.rhs) << ' '
        << terms.size();
    for (const auto& [j, a] : terms) out << ' ' << j << ':' << fixed(a);
    out << '\n';
  }
  out << "end\n";
}

}  // namespace zonalloss

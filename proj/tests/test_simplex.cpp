#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "zonalloss/milp.hpp"

namespace zonalloss {
namespace {

TEST(SolveLp, BoundActiveMinimum) {
  CanonicalProblem p;
  p.add_variable(1.0, 3.0, 1.0);
  const Solution s = solve_lp(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_DOUBLE_EQ(s.x[0], 1.0);
  EXPECT_DOUBLE_EQ(s.objective, 1.0);
}

TEST(SolveLp, UpperBoundMinimum) {
  CanonicalProblem p;
  p.add_variable(0.0, 2.0, -1.0);
  const Solution s = solve_lp(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_DOUBLE_EQ(s.x[0], 2.0);
  EXPECT_DOUBLE_EQ(s.objective, -2.0);
}

TEST(SolveLp, MeritOrderDispatchAndBalanceDual) {
  CanonicalProblem p;
  const Index g1 = p.add_variable(0.0, 60.0, 10.0);
  const Index g2 = p.add_variable(0.0, 100.0, 20.0);
  p.add_row({{g1, 1.0}, {g2, 1.0}}, Relation::Equal, 100.0);
  const Solution s = solve_lp(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.x[g1], 60.0, 1e-9);
  EXPECT_NEAR(s.x[g2], 40.0, 1e-9);
  EXPECT_NEAR(s.objective, 1400.0, 1e-9);
  ASSERT_TRUE(s.duals.has_value());
  EXPECT_NEAR((*s.duals)[0], 20.0, 1e-9);

  // Same optimum from the vertex-enumeration oracle.
  const auto ref = testing::vertex_enumeration_lp(p, p.lower, p.upper);
  ASSERT_TRUE(ref.has_value());
  EXPECT_NEAR(*ref, 1400.0, 1e-9);
}

TEST(SolveLp, DetectsInfeasibility) {
  CanonicalProblem p;
  const Index x = p.add_variable(0.0, 1.0);
  const Index y = p.add_variable(0.0, 1.0);
  p.add_row({{x, 1.0}, {y, 1.0}}, Relation::GreaterEqual, 3.0);
  EXPECT_EQ(solve_lp(p).status, SolveStatus::Infeasible);
}

TEST(SolveLp, RejectsMalformedProblems) {
  CanonicalProblem crossed;
  crossed.add_variable(2.0, 1.0);
  EXPECT_THROW(solve_lp(crossed), MalformedProblem);

  CanonicalProblem infinite;
  infinite.add_variable(0.0, std::numeric_limits<double>::infinity());
  EXPECT_THROW(solve_lp(infinite), MalformedProblem);

  CanonicalProblem dangling;
  dangling.add_variable(0.0, 1.0);
  dangling.add_row({{3, 1.0}}, Relation::Equal, 0.0);
  EXPECT_THROW(solve_lp(dangling), MalformedProblem);
}

TEST(SolveLp, LongDoubleInstantiation) {
  CanonicalProblemT<long double> p;
  const Index g1 = p.add_variable(0, 60, 10);
  const Index g2 = p.add_variable(0, 100, 20);
  p.add_row({{g1, 1}, {g2, 1}}, Relation::Equal, 100);
  const auto s = solve_lp(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(static_cast<double>(s.objective), 1400.0, 1e-12);
}

// Random LPs against vertex enumeration, plus strong duality and feasibility checks.
TEST(SolveLp, MatchesVertexEnumerationOnRandomTinyLps) {
  std::mt19937_64 rng(7);
  int optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 3);
    CanonicalProblem p = testing::random_milp(rng, n, 0, m);
    const Solution s = solve_lp(p);
    const auto ref = testing::vertex_enumeration_lp(p, p.lower, p.upper);
    if (!ref) {
      EXPECT_EQ(s.status, SolveStatus::Infeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(s.status, SolveStatus::Optimal) << "trial " << trial;
    ++optimal;
    EXPECT_NEAR(s.objective, *ref, 1e-6) << "trial " << trial;

    for (Index j = 0; j < p.num_variables(); ++j) {
      EXPECT_GE(s.x[j], p.lower[j] - 1e-7);
      EXPECT_LE(s.x[j], p.upper[j] + 1e-7);
    }
    // Dual objective: y'b plus reduced costs times the bound each variable sits on.
    const auto& y = *s.duals;
    double dual_obj = 0.0;
    for (Index i = 0; i < p.num_rows(); ++i) {
      const double act = p.row_activity(i, s.x);
      const auto& row = p.rows[i];
      if (row.relation == Relation::Equal) EXPECT_NEAR(act, row.rhs, 1e-6);
      if (row.relation == Relation::LessEqual) {
        EXPECT_LE(act, row.rhs + 1e-6);
        EXPECT_LE(y[i], 1e-7);
      }
      if (row.relation == Relation::GreaterEqual) {
        EXPECT_GE(act, row.rhs - 1e-6);
        EXPECT_GE(y[i], -1e-7);
      }
      dual_obj += y[i] * row.rhs;
    }
    for (Index j = 0; j < p.num_variables(); ++j) {
      double d = p.objective[j];
      for (Index i = 0; i < p.num_rows(); ++i)
        for (const auto& [k, a] : p.rows[i].terms)
          if (k == j) d -= y[i] * a;
      dual_obj += d >= 0 ? d * p.lower[j] : d * p.upper[j];
    }
    EXPECT_NEAR(dual_obj, s.objective, 1e-6) << "trial " << trial;
  }
  EXPECT_GT(optimal, 100);
}

TEST(SolveLp, DeterministicSolutionVector) {
  std::mt19937_64 rng(11);
  const CanonicalProblem p = testing::random_milp(rng, 12, 0, 8);
  const Solution a = solve_lp(p);
  const Solution b = solve_lp(p);
  ASSERT_EQ(a.status, b.status);
  if (a.status == SolveStatus::Optimal) {
    for (Index j = 0; j < p.num_variables(); ++j) EXPECT_EQ(a.x[j], b.x[j]);
  }
}

TEST(SolveLp, HandlesDegenerateTransportationProblem) {
  // 4 sources x 4 sinks with equal supplies and demands: highly degenerate.
  CanonicalProblem p;
  std::vector<std::vector<Index>> x(4, std::vector<Index>(4));
  for (int s = 0; s < 4; ++s)
    for (int t = 0; t < 4; ++t) x[s][t] = p.add_variable(0.0, 100.0, 1.0 + ((s * 7 + t * 3) % 5));
  for (int s = 0; s < 4; ++s) {
    std::vector<std::pair<Index, double>> terms;
    for (int t = 0; t < 4; ++t) terms.emplace_back(x[s][t], 1.0);
    p.add_row(terms, Relation::Equal, 10.0);
  }
  for (int t = 0; t < 4; ++t) {
    std::vector<std::pair<Index, double>> terms;
    for (int s = 0; s < 4; ++s) terms.emplace_back(x[s][t], 1.0);
    p.add_row(terms, Relation::Equal, 10.0);
  }
  const Solution s = solve_lp(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  // Each cost row contains a 1 in a distinct column pattern: brute force over permutations.
  double best = 1e18;
  std::vector<int> perm{0, 1, 2, 3};
  do {
    double c = 0.0;
    for (int k = 0; k < 4; ++k) c += 10.0 * p.objective[x[k][perm[k]]];
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_NEAR(s.objective, best, 1e-9);
}

TEST(ProblemDump, FixedPointFormat) {
  CanonicalProblem p;
  const Index g = p.add_variable(0.0, 60.0, 10.0);
  const Index u = p.add_binary();
  p.add_row({{g, 1.0}, {u, -60.0}}, Relation::LessEqual, 0.0);
  std::ostringstream os;
  write_problem_dump(os, p, {"g", "u"}, {"cap"});
  EXPECT_EQ(os.str(),
            "# zonalloss canonical problem v1\n"
            "problem 2 1 1\n"
            "var 0 g 0.000000000 60.000000000 10.000000000 C\n"
            "var 1 u 0.000000000 1.000000000 0.000000000 B\n"
            "row 0 cap <= 0.000000000 2 0:1.000000000 1:-60.000000000\n"
            "end\n");
}

TEST(Oracles, TableauAgreesWithVertexEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 4);
    const CanonicalProblem p = testing::random_milp(rng, n, 0, m);
    const auto a = testing::vertex_enumeration_lp(p, p.lower, p.upper);
    const auto b = testing::dense_tableau_lp(p, p.lower, p.upper);
    ASSERT_EQ(a.has_value(), b.has_value()) << "trial " << trial;
    if (a) EXPECT_NEAR(*a, *b, 1e-6) << "trial " << trial;
  }
}

TEST(WarmStart, MatchesColdSolveAfterBoundChanges) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int infeasible = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const CanonicalProblem p = testing::random_milp(rng, 12 + trial % 10, 6, 6 + trial % 8);
    std::vector<double> lo = p.lower;
    std::vector<double> hi = p.upper;
    for (Index j : p.binaries) hi[j] = 1.0;
    BoundedPrimalSimplex<double> warm(p);
    const Solution root = warm.solve(lo, hi);
    ASSERT_EQ(root.status, SolveStatus::Optimal);
    const auto basis = warm.basis();
    for (int k = 0; k < 3; ++k) {
      const Index j = static_cast<Index>(unit(rng) * p.num_variables()) % p.num_variables();
      const double cut = lo[j] + (hi[j] - lo[j]) * unit(rng);
      if (unit(rng) < 0.5) hi[j] = cut;
      else lo[j] = cut;
    }
    const Solution a = warm.solve_from(basis, lo, hi);
    BoundedPrimalSimplex<double> cold(p);
    const Solution b = cold.solve(lo, hi);
    ASSERT_EQ(a.status, b.status) << "trial " << trial;
    if (b.status == SolveStatus::Optimal) {
      EXPECT_NEAR(a.objective, b.objective, 1e-7) << "trial " << trial;
    } else {
      ++infeasible;
    }
  }
  EXPECT_GT(infeasible, 0);
}

}  // namespace
}  // namespace zonalloss

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "zonalloss/milp.hpp"

namespace zonalloss {
namespace {

TEST(SolveMilp, NoBinariesMatchesLp) {
  std::mt19937_64 rng(3);
  const CanonicalProblem p = testing::random_milp(rng, 10, 0, 6);
  const Solution lp = solve_lp(p);
  const Solution milp = solve_milp(p);
  ASSERT_EQ(lp.status, milp.status);
  ASSERT_EQ(lp.status, SolveStatus::Optimal);
  EXPECT_EQ(lp.objective, milp.objective);
  for (Index j = 0; j < p.num_variables(); ++j) EXPECT_EQ(lp.x[j], milp.x[j]);
}

// One feasible direction: f+ - f- = 50 forces u = 1.
TEST(SolveMilp, DirectionBinaryPattern) {
  CanonicalProblem p;
  const Index fp = p.add_variable(0.0, 100.0, 1.0);
  const Index fm = p.add_variable(0.0, 100.0, 1.0);
  const Index u = p.add_binary();
  p.add_row({{fp, 1.0}, {fm, -1.0}}, Relation::Equal, 50.0);
  p.add_row({{fp, 1.0}, {u, -100.0}}, Relation::LessEqual, 0.0);
  p.add_row({{fm, 1.0}, {u, 100.0}}, Relation::LessEqual, 100.0);
  const Solution s = solve_milp(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.x[u], 1.0, 1e-9);
  EXPECT_NEAR(s.x[fp], 50.0, 1e-9);
  EXPECT_NEAR(s.x[fm], 0.0, 1e-9);
  EXPECT_NEAR(s.objective, 50.0, 1e-9);
}

TEST(SolveMilp, InfeasibleIntegerProblem) {
  // 2u = 1 has a fractional solution only.
  CanonicalProblem p;
  const Index u = p.add_binary(1.0);
  p.add_row({{u, 2.0}}, Relation::Equal, 1.0);
  EXPECT_EQ(solve_lp(p).status, SolveStatus::Optimal);
  EXPECT_EQ(solve_milp(p).status, SolveStatus::Infeasible);
}

TEST(SolveMilp, NodeLimitIsEnforced) {
  std::mt19937_64 rng(5);
  const CanonicalProblem p = testing::random_milp(rng, 20, 10, 8);
  MilpOptions options;
  options.node_limit = 1;
  // A single node suffices only if the root relaxation is integral.
  const Solution root = solve_lp(p);
  bool integral = true;
  for (Index j : p.binaries) integral = integral && std::abs(root.x[j] - std::round(root.x[j])) < 1e-6;
  if (!integral) {
    EXPECT_THROW(solve_milp(p, options), NodeLimitExceeded);
  }
}

TEST(SolveMilp, MatchesEnumerationOnRandom8BinaryInstances) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const CanonicalProblem p = testing::random_milp(rng, 14, 8, 6);
    const Solution s = solve_milp(p);
    const auto ref = testing::enumerate_binaries(p);
    ASSERT_TRUE(ref.has_value());
    ASSERT_EQ(s.status, SolveStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(s.objective, *ref, 1e-6) << "trial " << trial;
    for (Index j : p.binaries) EXPECT_NEAR(s.x[j], std::round(s.x[j]), 1e-6);

    // The incumbent is never better than the relaxation.
    const Solution relax = solve_lp(p);
    EXPECT_GE(s.objective, relax.objective - 1e-9);
  }
}

TEST(DualsAtFixedBinaries, ReproducesIncumbentObjective) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const CanonicalProblem p = testing::random_milp(rng, 12, 6, 6);
    const Solution s = solve_milp(p);
    ASSERT_EQ(s.status, SolveStatus::Optimal);
    const auto values = binary_values(p, s.x);
    const Solution fixed = duals_at_fixed_binaries<double>(p, values);
    ASSERT_EQ(fixed.status, SolveStatus::Optimal);
    EXPECT_NEAR(fixed.objective, s.objective, 1e-6);
    ASSERT_TRUE(fixed.duals.has_value());
    EXPECT_EQ(fixed.duals->size(), p.num_rows());
  }
}

TEST(DualsAtFixedBinaries, SingleGeneratorPrice) {
  CanonicalProblem p;
  const Index g = p.add_variable(0.0, 500.0, 25.0);
  const Index u = p.add_binary();
  p.add_row({{g, 1.0}}, Relation::Equal, 120.0);
  p.add_row({{g, 1.0}, {u, -500.0}}, Relation::LessEqual, 0.0);
  const std::vector<double> fixing{1.0};
  const Solution s = duals_at_fixed_binaries<double>(p, fixing);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR((*s.duals)[0], 25.0, 1e-9);
}

TEST(DualsAtFixedBinaries, InfeasibleFixingThrows) {
  // Transfer of 50 MW is only possible in the forward direction (u = 1).
  CanonicalProblem p;
  const Index fp = p.add_variable(0.0, 100.0);
  const Index fm = p.add_variable(0.0, 100.0);
  const Index u = p.add_binary();
  p.add_row({{fp, 1.0}, {fm, -1.0}}, Relation::Equal, 50.0);
  p.add_row({{fp, 1.0}, {u, -100.0}}, Relation::LessEqual, 0.0);
  p.add_row({{fm, 1.0}, {u, 100.0}}, Relation::LessEqual, 100.0);
  const std::vector<double> wrong{0.0};
  EXPECT_THROW(duals_at_fixed_binaries<double>(p, wrong), InfeasibleFixing);
  const std::vector<double> fractional{0.5};
  EXPECT_THROW(duals_at_fixed_binaries<double>(p, fractional), MalformedProblem);
}

}  // namespace
}  // namespace zonalloss

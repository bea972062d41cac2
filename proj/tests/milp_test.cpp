#include "ordmed/milp.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ordmed {
namespace {

// Exhaustive optimum over all binary assignments; continuous columns are
// handled by an LP with the binaries fixed.
std::optional<double> enumerate_binaries(const MilpProblem& p) {
  std::vector<int> bins;
  for (std::size_t j = 0; j < p.binary.size(); ++j)
    if (p.binary[j]) bins.push_back(static_cast<int>(j));
  std::optional<double> best;
  const bool maximize = p.lp.sense == ObjSense::kMaximize;
  for (unsigned mask = 0; mask < (1u << bins.size()); ++mask) {
    LinearProgram fixed = p.lp;
    for (std::size_t k = 0; k < bins.size(); ++k) {
      const double v = (mask >> k) & 1u ? 1.0 : 0.0;
      fixed.col_lo[bins[k]] = fixed.col_hi[bins[k]] = v;
    }
    double obj;
    if (bins.size() == p.binary.size()) {
      std::vector<double> x(p.binary.size());
      for (std::size_t k = 0; k < bins.size(); ++k) x[bins[k]] = fixed.col_lo[bins[k]];
      if (p.lp.max_violation(x) > 1e-9) continue;
      obj = p.lp.evaluate(x);
    } else {
      const LpSolution s = solve_lp(fixed);
      if (s.status != LpStatus::kOptimal) continue;
      obj = s.objective;
    }
    if (!best || (maximize ? obj > *best : obj < *best)) best = obj;
  }
  return best;
}

MilpProblem random_pure_binary(std::mt19937_64& rng, int n, int m) {
  std::uniform_int_distribution<int> coef(-5, 9), cost(-10, 10);
  MilpProblem p;
  p.lp.sense = (rng() & 1) ? ObjSense::kMaximize : ObjSense::kMinimize;
  for (int j = 0; j < n; ++j) p.lp.add_variable(0.0, 1.0, cost(rng));
  for (int r = 0; r < m; ++r) {
    std::vector<std::pair<int, double>> t;
    int pos = 0;
    for (int j = 0; j < n; ++j) {
      const int a = coef(rng);
      t.push_back({j, a});
      pos += std::max(a, 0);
    }
    p.lp.add_row(t, (r % 2) ? RowSense::kGe : RowSense::kLe, (r % 2) ? -pos / 4 : pos / 2);
  }
  p.binary.assign(static_cast<std::size_t>(n), true);
  p.integral_objective = true;
  return p;
}

TEST(SolveMilp, SmallKnapsack) {
  MilpProblem p;
  p.lp.sense = ObjSense::kMaximize;
  p.lp.add_variable(0.0, 1.0, 5.0);
  p.lp.add_variable(0.0, 1.0, 4.0);
  p.lp.add_row({{0, 3.0}, {1, 2.0}}, RowSense::kLe, 4.0);
  p.binary = {true, true};
  const MilpSolution s = solve_milp(p);
  ASSERT_EQ(s.status, MilpStatus::kOptimal);
  EXPECT_EQ(s.objective, 5.0);
  EXPECT_EQ(s.x, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(*enumerate_binaries(p), 5.0);
}

TEST(SolveMilp, NoBinariesEqualsLp) {
  LinearProgram lp;
  lp.add_variable(0.0, 4.0, -1.0);
  lp.add_variable(0.0, 4.0, -2.0);
  lp.add_row({{0, 1.0}, {1, 3.0}}, RowSense::kLe, 6.5);
  MilpProblem p;
  p.lp = lp;
  p.binary = {false, false};
  const MilpSolution s = solve_milp(p);
  const LpSolution l = solve_lp(lp);
  ASSERT_EQ(s.status, MilpStatus::kOptimal);
  EXPECT_NEAR(s.objective, l.objective, 1e-12);
}

TEST(SolveMilp, InfeasibleRoot) {
  MilpProblem p;
  p.lp.add_variable(0.0, 1.0, 1.0);
  p.lp.add_row({{0, 1.0}}, RowSense::kGe, 2.0);
  p.binary = {true};
  EXPECT_EQ(solve_milp(p).status, MilpStatus::kInfeasible);
}

TEST(SolveMilp, IntegerInfeasibleButLpFeasible) {
  MilpProblem p;
  p.lp.add_variable(0.0, 1.0, 1.0);
  p.lp.add_variable(0.0, 1.0, 1.0);
  p.lp.add_row({{0, 2.0}, {1, 2.0}}, RowSense::kEq, 1.0);
  p.binary = {true, true};
  EXPECT_EQ(solve_milp(p).status, MilpStatus::kInfeasible);
}

TEST(SolveMilp, TwelveBinaryInstancesMatchEnumeration) {
  std::mt19937_64 rng(4242);
  for (int rep = 0; rep < 12; ++rep) {
    const MilpProblem p = random_pure_binary(rng, 12, 4);
    const auto oracle = enumerate_binaries(p);
    const MilpSolution s = solve_milp(p);
    if (!oracle) {
      EXPECT_EQ(s.status, MilpStatus::kInfeasible) << rep;
      continue;
    }
    ASSERT_EQ(s.status, MilpStatus::kOptimal) << rep;
    EXPECT_EQ(s.objective, *oracle) << rep;
    EXPECT_LE(p.lp.max_violation(s.x), 1e-7);
    for (double v : s.x) EXPECT_TRUE(v == 0.0 || v == 1.0);
  }
}

TEST(SolveMilp, MixedInstancesMatchEnumeration) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 15; ++rep) {
    MilpProblem p;
    const int nb = 8, nc = 3;
    for (int j = 0; j < nb; ++j) p.lp.add_variable(0.0, 1.0, u(rng));
    for (int j = 0; j < nc; ++j) p.lp.add_variable(-2.0, 2.0, u(rng));
    for (int r = 0; r < 5; ++r) {
      std::vector<std::pair<int, double>> t;
      for (int j = 0; j < nb + nc; ++j) t.push_back({j, u(rng)});
      p.lp.add_row(t, r % 2 ? RowSense::kGe : RowSense::kLe, r % 2 ? -1.0 : 1.0);
    }
    p.binary.assign(nb + nc, false);
    for (int j = 0; j < nb; ++j) p.binary[j] = true;
    const auto oracle = enumerate_binaries(p);
    const MilpSolution s = solve_milp(p);
    ASSERT_TRUE(oracle.has_value());
    ASSERT_EQ(s.status, MilpStatus::kOptimal) << rep;
    EXPECT_NEAR(s.objective, *oracle, 1e-8) << rep;
    EXPECT_LE(p.lp.max_violation(s.x), 1e-7);
  }
}

TEST(SolveMilp, SixteenBinariesMatchEnumeration) {
  std::mt19937_64 rng(16);
  for (int rep = 0; rep < 3; ++rep) {
    const MilpProblem p = random_pure_binary(rng, 16, 3);
    const auto oracle = enumerate_binaries(p);
    const MilpSolution s = solve_milp(p);
    ASSERT_TRUE(oracle.has_value());
    ASSERT_EQ(s.status, MilpStatus::kOptimal);
    EXPECT_EQ(s.objective, *oracle);
  }
}

TEST(SolveMilp, BoundHistoryIsMonotone) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 8; ++rep) {
    MilpProblem p = random_pure_binary(rng, 14, 4);
    MilpLimits lim;
    lim.record_bound_history = true;
    const MilpSolution s = solve_milp(p, lim);
    const double sg = p.lp.sense == ObjSense::kMaximize ? -1.0 : 1.0;
    for (std::size_t k = 1; k < s.bound_history.size(); ++k)
      EXPECT_GE(sg * s.bound_history[k], sg * s.bound_history[k - 1] - 1e-9) << rep << " " << k;
  }
}

TEST(SolveMilp, NodeLimitKeepsValidBound) {
  std::mt19937_64 rng(31);
  const MilpProblem p = random_pure_binary(rng, 16, 4);
  const auto oracle = enumerate_binaries(p);
  ASSERT_TRUE(oracle.has_value());
  MilpLimits lim;
  lim.max_nodes = 3;
  const MilpSolution s = solve_milp(p, lim);
  const double sg = p.lp.sense == ObjSense::kMaximize ? -1.0 : 1.0;
  EXPECT_LE(sg * s.bound, sg * *oracle + 1e-9);
  if (s.has_incumbent()) {
    EXPECT_GE(sg * s.objective, sg * *oracle - 1e-9);
    EXPECT_LE(p.lp.max_violation(s.x), 1e-7);
  }
}

TEST(SolveMilp, HookIncumbentIsUsedAndChecked) {
  MilpProblem p;
  p.lp.sense = ObjSense::kMaximize;
  p.lp.add_variable(0.0, 1.0, 5.0);
  p.lp.add_variable(0.0, 1.0, 4.0);
  p.lp.add_row({{0, 3.0}, {1, 2.0}}, RowSense::kLe, 4.0);
  p.binary = {true, true};
  int calls = 0;
  p.incumbent_hook = [&](std::span<const double>) -> std::optional<std::vector<double>> {
    ++calls;
    return std::vector<double>{1.0, 1.0};  // infeasible, must be rejected
  };
  const MilpSolution s = solve_milp(p);
  EXPECT_GT(calls, 0);
  EXPECT_EQ(s.objective, 5.0);
}

TEST(SolveMilp, TiedOptimaAreReportedReproducibly) {
  // Every single-item choice is optimal.
  MilpProblem p;
  p.lp.sense = ObjSense::kMaximize;
  for (int j = 0; j < 4; ++j) p.lp.add_variable(0.0, 1.0, 1.0);
  p.lp.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}, RowSense::kLe, 1.0);
  p.binary.assign(4, true);
  const MilpSolution s = solve_milp(p);
  EXPECT_EQ(s.objective, 1.0);
  EXPECT_EQ(s.x, solve_milp(p).x);
}

TEST(SolveMilp, Deterministic) {
  std::mt19937_64 rng(8);
  const MilpProblem p = random_pure_binary(rng, 14, 5);
  const MilpSolution a = solve_milp(p), b = solve_milp(p);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.lp_iterations, b.lp_iterations);
}

TEST(SolveMilp, RejectsMalformedBinary) {
  MilpProblem p;
  p.lp.add_variable(0.0, 2.0, 1.0);
  p.binary = {true};
  EXPECT_THROW(solve_milp(p), Error);
}

}  // namespace
}  // namespace ordmed

#include <gtest/gtest.h>

#include <cmath>

#include "ggl/baselines.hpp"
#include "ggl/errors.hpp"
#include "ggl/metrics.hpp"
#include "toy_game.hpp"

using namespace ggl;
using ggl::testing::ToyGame;

namespace {

Strategy linear_strategy(double s) {
  return [s](double, const Mat& x) { return Mat(-s * x); };
}

PathBundle copy_scaled(const PathBundle& b, double state_scale, double strategy_scale) {
  PathBundle c = b;
  for (Mat& s : c.states) s *= state_scale;
  for (Mat& a : c.strategies) a *= strategy_scale;
  return c;
}

}  // namespace

TEST(PathwiseRmse, IdenticalBundlesGiveZero) {
  ToyGame game(3, 0.0, -0.2, 0.5, 0.1, 0.5);
  PathBundle b = simulate(game, linear_strategy(0.5), TimeGrid(1.0, 10), 100, Rng(1), {.keep_noise = true});
  auto [rx, ra] = pathwise_rmse(b, b);
  EXPECT_EQ(rx, 0.0);
  EXPECT_EQ(ra, 0.0);
}

TEST(PathwiseRmse, DoubledStatesGiveOne) {
  ToyGame game(3, 0.0, -0.2, 0.5, 0.1, 0.5);
  PathBundle b = simulate(game, linear_strategy(0.5), TimeGrid(1.0, 10), 100, Rng(2));
  auto [rx, ra] = pathwise_rmse(b, copy_scaled(b, 2.0, 1.0));
  EXPECT_NEAR(rx, 1.0, 1e-14);
  EXPECT_EQ(ra, 0.0);
  auto [rx3, ra3] = pathwise_rmse(b, copy_scaled(b, 1.0, 0.0));
  EXPECT_EQ(rx3, 0.0);
  EXPECT_NEAR(ra3, 1.0, 1e-14);
}

TEST(PathwiseRmse, MatchesDirectSums) {
  ToyGame game(2, 0.1, -0.4, 0.5, 0.0, 0.5);
  TimeGrid grid(1.0, 5);
  PathBundle a = simulate(game, linear_strategy(0.5), grid, 30, Rng(3));
  PathBundle b = simulate(game, linear_strategy(0.8), grid, 30, Rng(3));
  double num = 0.0, den = 0.0;
  for (int k = 0; k < grid.steps; ++k)
    for (int p = 0; p < 30; ++p)
      for (int i = 0; i < 2; ++i) {
        num += std::pow(a.strategies[k](p, i) - b.strategies[k](p, i), 2);
        den += std::pow(a.strategies[k](p, i), 2);
      }
  EXPECT_NEAR(pathwise_rmse(a, b).second, num / den, 1e-14);
}

TEST(PathwiseRmse, RejectsMismatchedBundles) {
  ToyGame game(2, 0.0, 0.0, 0.5, 0.0, 0.5);
  PathBundle a = simulate(game, linear_strategy(0.5), TimeGrid(1.0, 5), 10, Rng(4), {.keep_noise = true});
  PathBundle shorter = simulate(game, linear_strategy(0.5), TimeGrid(1.0, 4), 10, Rng(4));
  EXPECT_THROW(pathwise_rmse(a, shorter), ShapeError);
  PathBundle other = simulate(game, linear_strategy(0.5), TimeGrid(1.0, 5), 10, Rng(5), {.keep_noise = true});
  EXPECT_THROW(pathwise_rmse(a, other), ParameterError);
}

TEST(PathwiseRmse, ZeroBaselineIsReported) {
  ToyGame game(2, 0.0, 0.0, 0.0, 0.0, 0.0);
  PathBundle a = simulate(game, linear_strategy(0.0), TimeGrid(1.0, 3), 4, Rng(6));
  PathBundle b = copy_scaled(a, 1.0, 1.0);
  for (Mat& s : b.strategies) s.setOnes();
  EXPECT_THROW(pathwise_rmse(a, b), NumericalError);
}

TEST(MaxRelativeError, ScaledValues) {
  Eigen::VectorXd vb(3);
  vb << 0.5, -2.0, 1.25;
  EXPECT_EQ(max_relative_error(vb, vb), 0.0);
  EXPECT_NEAR(max_relative_error(vb, 1.02 * vb), 0.02, 1e-14);
  Eigen::VectorXd vc = vb;
  vc(1) = -2.2;
  EXPECT_NEAR(max_relative_error(vb, vc), 0.1, 1e-14);
}

TEST(MaxRelativeError, GuardsTinyBaseline) {
  Eigen::VectorXd vb(2);
  vb << 1.0, 1e-12;
  EXPECT_THROW(max_relative_error(vb, vb), NumericalError);
  EXPECT_THROW(max_relative_error(vb, Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST(Mre, CandidateEqualToBaselineGivesZero) {
  ToyGame game(3, 0.1, -0.5, 0.4, 0.2, 0.5);
  MetricResult r = mre(game, linear_strategy(0.3), linear_strategy(0.3), 40, 40, 500, Rng(7));
  EXPECT_EQ(r.mre, 0.0);
  EXPECT_EQ(r.rmse_x, 0.0);
  EXPECT_EQ(r.rmse_alpha, 0.0);
  EXPECT_EQ(r.v_baseline, r.v_candidate);
}

TEST(Mre, ValuesMatchIndependentCostEstimates) {
  ToyGame game(2, 0.0, -0.3, 0.5, 0.0, 0.5);
  MetricResult r = mre(game, linear_strategy(0.2), linear_strategy(0.6), 100, 10, 800, Rng(8));
  CostEstimate fine = expected_cost(game, linear_strategy(0.2), TimeGrid(1.0, 100), 800, Rng(8));
  EXPECT_LT((r.v_baseline - fine.mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(r.mre, max_relative_error(r.v_baseline, r.v_candidate), 1e-15);
  EXPECT_GT(r.mre, 0.0);
}

// Shared noise: the metric for a fixed pair of strategies converges as the
// path count grows, with fluctuations shrinking like 1/sqrt(n).
TEST(CoupledRmse, StableUnderDoublingPathCount) {
  Graph g = make_graph(GraphKind::cycle, 6);
  LQModel m(g, LQParams{});
  RiccatiSolution sol = solve_lq_riccati(m, 200);
  Strategy base = [&](double t, const Mat& x) { return lq_baseline_feedback(sol, t, x); };
  Strategy off = [&](double t, const Mat& x) { return Mat(1.1 * lq_baseline_feedback(sol, t, x)); };
  std::vector<double> small, large;
  for (uint64_t seed = 0; seed < 16; ++seed) {
    small.push_back(coupled_rmse(m, base, off, 200, 20, 500, Rng(100 + seed)).second);
    large.push_back(coupled_rmse(m, base, off, 200, 20, 1000, Rng(200 + seed)).second);
  }
  auto spread = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::make_pair(mean, std::sqrt(s / (v.size() - 1)));
  };
  auto [m_small, s_small] = spread(small);
  auto [m_large, s_large] = spread(large);
  EXPECT_NEAR(m_small, m_large, 3.0 * (s_small + s_large));
  EXPECT_LT(s_large, 1.5 * s_small);
  EXPECT_GT(m_large, 0.0);
}

TEST(CoupledRmse, SameStrategyOnCoarseGridGivesDiscretisationOnly) {
  Graph g = make_graph(GraphKind::complete, 10);
  LQModel m(g, LQParams{});
  RiccatiSolution sol = solve_lq_riccati(m, 1000);
  Strategy base = [&](double t, const Mat& x) { return lq_baseline_feedback(sol, t, x); };
  auto [rx20, ra20] = coupled_rmse(m, base, base, 1000, 20, 500, Rng(9));
  auto [rx100, ra100] = coupled_rmse(m, base, base, 1000, 100, 500, Rng(9));
  EXPECT_GT(ra20, 0.0);
  EXPECT_LT(ra100, ra20);
  EXPECT_LT(rx100, rx20);
}

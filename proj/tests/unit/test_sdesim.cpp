#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "ggl/baselines.hpp"
#include "ggl/errors.hpp"
#include "ggl/sdesim.hpp"
#include "toy_game.hpp"

using namespace ggl;
using ggl::testing::ToyGame;

namespace {

Strategy zero_strategy() {
  return [](double, const Mat& x) { return Mat(Mat::Zero(x.rows(), x.cols())); };
}

Strategy scaled_strategy(double s) {
  return [s](double, const Mat& x) { return Mat(-s * x); };
}

}  // namespace

TEST(TimeGrid, NodesAndValidation) {
  TimeGrid g(2.0, 8);
  EXPECT_DOUBLE_EQ(g.h(), 0.25);
  EXPECT_DOUBLE_EQ(g.time(3), 0.75);
  EXPECT_THROW(TimeGrid(0.0, 4), ParameterError);
  EXPECT_THROW(TimeGrid(1.0, 0), ParameterError);
}

TEST(Simulate, FrozenDynamicsKeepInitialState) {
  ToyGame game(3, 0.0, 0.0, 0.0, 0.0, 0.5);
  PathBundle b = simulate(game, zero_strategy(), TimeGrid(1.0, 10), 50, Rng(1));
  ASSERT_EQ(b.states.size(), 11u);
  ASSERT_EQ(b.strategies.size(), 10u);
  for (const Mat& s : b.states) EXPECT_EQ(s, b.states[0]);
  EXPECT_LE(b.states[0].cwiseAbs().maxCoeff(), 0.5);
  EXPECT_GT(b.states[0].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Simulate, UnitDriftIsExactOnDyadicGrid) {
  ToyGame game(2, 1.0, 0.0, 0.0, 0.0, 0.0);
  TimeGrid grid(1.0, 8);
  PathBundle b = simulate(game, zero_strategy(), grid, 3, Rng(2));
  for (int k = 0; k <= grid.steps; ++k)
    for (int p = 0; p < 3; ++p)
      for (int i = 0; i < 2; ++i) EXPECT_EQ(b.states[k](p, i), grid.time(k));
}

TEST(Simulate, BrownianVarianceAtHorizon) {
  ToyGame game(2, 0.0, 0.0, 1.0, 0.0, 0.0, 1.5);
  const int n = 100000;
  PathBundle b = simulate(game, zero_strategy(), TimeGrid(1.5, 4), n, Rng(3));
  for (int i = 0; i < 2; ++i) {
    Eigen::ArrayXd x = b.states[4].col(i).array();
    double mean = x.mean();
    double var = (x - mean).square().sum() / (n - 1);
    double se = 1.5 * std::sqrt(2.0 / (n - 1));
    EXPECT_NEAR(var, 1.5, 3.0 * se);
  }
}

TEST(Simulate, CommonNoiseMovesAllPlayersTogether) {
  ToyGame game(4, 0.0, 0.0, 0.0, 0.7, 0.0);
  PathBundle b = simulate(game, zero_strategy(), TimeGrid(1.0, 5), 20, Rng(4), {.keep_noise = true});
  for (int p = 0; p < 20; ++p) {
    for (int i = 1; i < 4; ++i) EXPECT_EQ(b.states[5](p, i), b.states[5](p, 0));
    double w = 0.0;
    for (int k = 0; k < 5; ++k) w += std::sqrt(0.2) * 0.7 * b.noise[k](p, 0);
    EXPECT_NEAR(b.states[5](p, 0), w, 1e-14);
  }
}

TEST(Simulate, DeterministicAndBlockSizeIndependent) {
  ToyGame game(3, 0.1, -0.5, 0.4, 0.2, 0.5);
  TimeGrid grid(1.0, 12);
  PathBundle a = simulate(game, scaled_strategy(0.3), grid, 300, Rng(5), {.block_size = 256});
  PathBundle b = simulate(game, scaled_strategy(0.3), grid, 300, Rng(5), {.block_size = 7});
  for (int k = 0; k <= grid.steps; ++k) EXPECT_EQ(a.states[k], b.states[k]);
  PathBundle c = simulate(game, scaled_strategy(0.3), grid, 300, Rng(6));
  EXPECT_NE(a.states[grid.steps], c.states[grid.steps]);
}

TEST(Simulate, PathsAreIndependent) {
  ToyGame game(2, 0.0, 0.0, 1.0, 0.0, 0.0);
  const int n = 20000;
  PathBundle b = simulate(game, zero_strategy(), TimeGrid(1.0, 2), n, Rng(7), {.keep_noise = true});
  // Correlation between increments of consecutive paths.
  Eigen::ArrayXd u = b.noise[0].col(1).head(n - 1).array();
  Eigen::ArrayXd v = b.noise[0].col(1).tail(n - 1).array();
  double corr = ((u - u.mean()) * (v - v.mean())).mean() / std::sqrt((u - u.mean()).square().mean() *
                                                                      (v - v.mean()).square().mean());
  EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Simulate, StrategyToggleKeepsNoiseBitwise) {
  ToyGame game(3, 0.0, 0.2, 0.5, 0.1, 0.5);
  TimeGrid grid(1.0, 6);
  PathBundle a = simulate(game, zero_strategy(), grid, 40, Rng(8), {.keep_noise = true});
  PathBundle b = simulate(game, scaled_strategy(2.0), grid, 40, Rng(8), {.keep_noise = true});
  EXPECT_EQ(a.states[0], b.states[0]);
  for (int k = 0; k < grid.steps; ++k) EXPECT_EQ(a.noise[k], b.noise[k]);
}

TEST(Simulate, OverflowNamesPath) {
  ToyGame game(2, 0.0, 1e200, 0.0, 0.0, 1.0);
  try {
    simulate(game, zero_strategy(), TimeGrid(1.0, 50), 3, Rng(9));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("path"), std::string::npos);
    EXPECT_NE(msg.find("step"), std::string::npos);
  }
}

TEST(Simulate, RejectsBadStrategyShapeAndPathCount) {
  ToyGame game(2, 0.0, 0.0, 1.0, 0.0, 0.5);
  Strategy bad = [](double, const Mat& x) { return Mat(Mat::Zero(x.rows(), 1)); };
  EXPECT_THROW(simulate(game, bad, TimeGrid(1.0, 3), 4, Rng(1)), ShapeError);
  EXPECT_THROW(simulate(game, zero_strategy(), TimeGrid(1.0, 3), 0, Rng(1)), ParameterError);
}

TEST(Coupled, IdenticalGridsAndStrategiesGiveIdenticalBundles) {
  ToyGame game(3, 0.1, -0.3, 0.5, 0.2, 0.5);
  auto [fine, held] = simulate_coupled(game, scaled_strategy(0.4), scaled_strategy(0.4), 20, 20, 100, Rng(10));
  for (int k = 0; k <= 20; ++k) EXPECT_EQ(fine.states[k], held.states[k]);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(fine.strategies[k], held.strategies[k]);
}

TEST(Coupled, DeterministicCoarseErrorIsFirstOrder) {
  ToyGame game(2, 0.0, -1.0, 0.0, 0.0, 1.0);
  auto [fine, held] = simulate_coupled(game, zero_strategy(), zero_strategy(), 1000, 20, 50, Rng(11));
  const double h = 1.0 / 20;
  for (int c = 0; c <= 20; ++c) {
    double diff = (fine.states[50 * c] - held.states[50 * c]).cwiseAbs().maxCoeff();
    EXPECT_LT(diff, h);
  }
  EXPECT_GT((fine.states[1000] - held.states[1000]).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Coupled, AggregatedIncrementsHaveCoarseVariance) {
  ToyGame game(2, 0.0, 0.0, 1.0, 0.0, 0.0);
  const int n = 20000;
  auto [fine, held] = simulate_coupled(game, zero_strategy(), zero_strategy(), 200, 10, n, Rng(12));
  // The first coarse increment spans 20 fine steps.
  Eigen::ArrayXd inc = held.states[20].col(0).array();
  double var = (inc - inc.mean()).square().sum() / (n - 1);
  double expect = 20.0 * (1.0 / 200);
  EXPECT_NEAR(var, expect, 3.0 * expect * std::sqrt(2.0 / (n - 1)));
  // Without drift the coarse state equals the summed fine increments.
  EXPECT_LT((held.states[20] - fine.states[20]).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Coupled, CandidateHeldConstantOnCoarseIntervals) {
  ToyGame game(2, 0.2, -0.5, 0.3, 0.0, 0.5);
  auto [fine, held] = simulate_coupled(game, zero_strategy(), scaled_strategy(1.0), 100, 10, 8, Rng(13));
  for (int k = 0; k < 100; ++k) {
    EXPECT_EQ(held.strategies[k], held.strategies[10 * (k / 10)]);
    EXPECT_EQ(held.states[k], held.states[10 * (k / 10)]);
  }
}

TEST(Coupled, RejectsIndivisibleGrids) {
  ToyGame game(2, 0.0, 0.0, 1.0, 0.0, 0.5);
  EXPECT_THROW(simulate_coupled(game, zero_strategy(), zero_strategy(), 1000, 30, 4, Rng(1)), ParameterError);
}

TEST(Simulate, RiccatiFeedbackRevertsDeviationsOnAverage) {
  Graph g = make_graph(GraphKind::cycle, 6);
  LQModel m(g, LQParams{});
  RiccatiSolution sol = solve_lq_riccati(m, 200);
  Strategy base = [&](double t, const Mat& x) { return lq_baseline_feedback(sol, t, x); };
  TimeGrid grid(1.0, 20);
  PathBundle b = simulate(m, base, grid, 10000, Rng(14));
  Mat d0 = m.deviation(b.states[0]);
  auto signed_mean = [&](int k) {
    Mat dk = m.deviation(b.states[k]);
    return (dk.array() * d0.array().sign()).mean();
  };
  double first = signed_mean(0);
  double mid = signed_mean(10);
  double last = signed_mean(20);
  EXPECT_GT(first, 0.0);
  EXPECT_LT(mid, first);
  EXPECT_LT(last, mid);
}

TEST(PathsCsv, RowCountAndHeader) {
  ToyGame game(2, 0.0, 0.0, 1.0, 0.0, 0.5);
  PathBundle b = simulate(game, zero_strategy(), TimeGrid(1.0, 4), 3, Rng(15));
  std::string path = ::testing::TempDir() + "/ggl_paths.csv";
  write_paths_csv(path, b);
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "path,t,player,state,strategy");
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 3 * 4 * 2);
  std::remove(path.c_str());
  EXPECT_THROW(write_paths_csv("/nonexistent-dir/x.csv", b), ParameterError);
}

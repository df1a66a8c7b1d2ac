#include <gtest/gtest.h>

#include <cmath>

#include "ggl/errors.hpp"
#include "ggl/games.hpp"
#include "ggl/graph.hpp"
#include "ggl/metrics.hpp"
#include "ggl/rng.hpp"

using namespace ggl;

namespace {

std::vector<Graph> generator_graphs() {
  std::vector<Graph> out;
  for (int n : {4, 6, 10}) {
    out.push_back(make_graph(GraphKind::cycle, n));
    out.push_back(make_graph(GraphKind::star, n));
    out.push_back(make_graph(GraphKind::complete, n));
    out.push_back(make_graph(GraphKind::complete_bipartite, n));
    out.push_back(make_graph(GraphKind::random_spanning_tree, n, 7));
  }
  return out;
}

Mat random_states(Rng& rng, int rows, int n, double lo = -2.0, double hi = 2.0) {
  Mat x(rows, n);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < n; ++c) x(r, c) = rng.uniform(lo, hi);
  return x;
}

Mat sqrt_degree_row(const Graph& g, double scale) {
  Mat x(1, g.n());
  for (int i = 0; i < g.n(); ++i) x(0, i) = scale * std::sqrt(static_cast<double>(g.degree(i)));
  return x;
}

PortfolioParams fixed_portfolio(int n, Rng& rng) { return sample_portfolio_params(n, rng); }

}  // namespace

TEST(Deviation, NeighbourSumsMatchLaplacianForm) {
  Rng rng(11);
  for (const Graph& g : generator_graphs()) {
    LQModel m(g, LQParams{});
    Mat x = random_states(rng, 5, g.n());
    Mat dev = m.deviation(x);
    for (int r = 0; r < x.rows(); ++r) {
      for (int i = 0; i < g.n(); ++i) {
        double avg = 0.0;
        for (int j : g.neighbors(i)) avg += x(r, j) / std::sqrt(static_cast<double>(g.degree(j)));
        avg /= std::sqrt(static_cast<double>(g.degree(i)));
        EXPECT_NEAR(dev(r, i), avg - x(r, i), 1e-14);
      }
    }
  }
}

TEST(Deviation, VanishesOnSqrtDegreeVector) {
  for (const Graph& g : generator_graphs()) {
    LQModel m(g, LQParams{});
    Mat x = sqrt_degree_row(g, 1.7);
    EXPECT_LT(m.deviation(x).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Deviation, CompleteGraphIsMeanOfOthers) {
  Graph g = make_graph(GraphKind::complete, 7);
  LQModel m(g, LQParams{});
  Rng rng(3);
  Mat x = random_states(rng, 4, 7);
  Mat dev = m.deviation(x);
  for (int r = 0; r < 4; ++r)
    for (int i = 0; i < 7; ++i) {
      double others = (x.row(r).sum() - x(r, i)) / 6.0;
      EXPECT_NEAR(dev(r, i), others - x(r, i), 1e-14);
    }
}

TEST(Deviation, TapeVersionMatches) {
  Graph g = make_graph(GraphKind::star, 6);
  LQModel m(g, LQParams{});
  Rng rng(5);
  Mat x = random_states(rng, 3, 6);
  Tape t;
  Var dv = m.deviation(t, t.constant(x));
  EXPECT_LT((dv.value() - m.deviation(x)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LQModel, ZeroZWithoutCrossTermGivesZeroControl) {
  Graph g = make_graph(GraphKind::cycle, 5);
  LQModel m(g, LQParams{});
  Rng rng(1);
  Mat x = random_states(rng, 3, 5);
  EXPECT_EQ(m.minimizer(x, Mat::Zero(3, 5)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LQModel, NullvectorStatesHaveOnlyControlCost) {
  Graph g = make_graph(GraphKind::star, 5);
  LQParams p;
  p.q = 0.4;
  LQModel m(g, p);
  Mat x = sqrt_degree_row(g, -0.8);
  Mat alpha(1, 5);
  alpha << 0.3, -1.0, 0.5, 2.0, 0.0;
  Mat f = m.running_cost(x, alpha);
  Mat gT = m.terminal_cost(x);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(f(0, i), 0.5 * alpha(0, i) * alpha(0, i), 1e-14);
    EXPECT_NEAR(gT(0, i), 0.0, 1e-14);
  }
}

TEST(LQModel, CoefficientsMatchDefinition) {
  Graph g = make_graph(GraphKind::cycle, 6);
  LQParams p;
  p.a = 0.3;
  p.q = 0.5;
  p.eps = 1.2;
  p.c = 0.7;
  LQModel m(g, p);
  Rng rng(9);
  Mat x = random_states(rng, 4, 6), alpha = random_states(rng, 4, 6);
  Mat dev = m.deviation(x);
  Mat b = m.drift(x, alpha), f = m.running_cost(x, alpha), gT = m.terminal_cost(x);
  Mat sig = m.sigma(x, alpha), sig0 = m.sigma0(x, alpha);
  for (int r = 0; r < 4; ++r)
    for (int i = 0; i < 6; ++i) {
      double d = dev(r, i), a = alpha(r, i);
      EXPECT_NEAR(b(r, i), p.a * d + a, 1e-14);
      EXPECT_NEAR(f(r, i), 0.5 * a * a - p.q * a * d + 0.5 * p.eps * d * d, 1e-13);
      EXPECT_NEAR(gT(r, i), 0.5 * p.c * d * d, 1e-14);
      EXPECT_EQ(sig(r, i), p.sigma);
      EXPECT_EQ(sig0(r, i), 0.0);
    }
}

TEST(LQModel, MinimizerAgreesWithGridSearch) {
  Rng rng(21);
  for (bool cubic : {false, true}) {
    Graph g = make_graph(GraphKind::random_spanning_tree, 8, 4);
    LQParams p;
    p.q = 0.6;
    p.eps = 1.0;
    LQModel m(g, p, cubic);
    for (int trial = 0; trial < 5; ++trial) {
      Mat x = random_states(rng, 1, 8), z = random_states(rng, 1, 8, -1.0, 1.0);
      Mat ahat = m.minimizer(x, z);
      Mat dev = m.deviation(x);
      for (int i = 0; i < 8; ++i) {
        // z_i = sigma * d_{x^i} v, so the Hamiltonian in alpha is alpha * z_i / sigma + f^i.
        double grad_v = z(0, i) / p.sigma, d = dev(0, i);
        auto ham = [&](double a) { return a * grad_v + 0.5 * a * a - p.q * a * d + 0.5 * p.eps * d * d; };
        double best = 0.0, best_val = INFINITY;
        for (double a = -5.0; a <= 5.0; a += 1e-4) {
          double v = ham(a);
          if (v < best_val) {
            best_val = v;
            best = a;
          }
        }
        EXPECT_NEAR(ahat(0, i), best, 1e-4);
        EXPECT_LE(ham(ahat(0, i)), best_val + 1e-12);
        // Stationarity: d/d alpha of the Hamiltonian vanishes at the minimizer.
        EXPECT_LT(std::abs(grad_v + ahat(0, i) - p.q * d), 1e-12);
      }
    }
  }
}

TEST(LQModel, TapeCoefficientsMatchBatched) {
  Graph g = make_graph(GraphKind::complete_bipartite, 6);
  LQParams p;
  p.q = 0.3;
  p.a = 0.2;
  Rng rng(4);
  for (bool cubic : {false, true}) {
    LQModel m(g, p, cubic);
    Mat x = random_states(rng, 5, 6), alpha = random_states(rng, 5, 6), z = random_states(rng, 5, 6);
    Tape t;
    Var xv = t.constant(x);
    EXPECT_LT((m.drift(t, xv, t.constant(alpha)).value() - m.drift(x, alpha)).cwiseAbs().maxCoeff(), 1e-14);
    for (int i = 0; i < 6; ++i) {
      Var ai = t.constant(Mat(alpha.col(i)));
      EXPECT_LT((m.running_cost(t, xv, ai, i).value() - m.running_cost(x, alpha).col(i)).cwiseAbs().maxCoeff(),
                1e-14);
      EXPECT_LT((m.terminal_cost(t, xv, i).value() - m.terminal_cost(x).col(i)).cwiseAbs().maxCoeff(), 1e-14);
      Var zi = t.constant(Mat(z.col(i)));
      EXPECT_LT((m.minimizer(t, xv, zi, i).value() - m.minimizer(x, z).col(i)).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(LQModel, RejectsInvalidParameters) {
  Graph g = make_graph(GraphKind::cycle, 4);
  LQParams p;
  p.sigma = 0.0;
  EXPECT_THROW(LQModel(g, p), ParameterError);
  p = LQParams{};
  p.q = 2.0;
  p.eps = 1.0;
  EXPECT_THROW(LQModel(g, p), ParameterError);
  p = LQParams{};
  p.c = -1.0;
  EXPECT_THROW(LQModel(g, p), ParameterError);
  p = LQParams{};
  p.T = 0.0;
  EXPECT_THROW(LQModel(g, p), ParameterError);
  EXPECT_THROW(LQModel(g, LQParams{}, Eigen::MatrixXd::Identity(3, 3)), ShapeError);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(4, 4);
  asym(0, 1) = 1.0;
  EXPECT_THROW(LQModel(g, LQParams{}, asym), ParameterError);
}

TEST(LQModel, CustomInteractionDrivesDeviation) {
  Graph g = make_graph(GraphKind::cycle, 6);
  Eigen::MatrixXd mh = multi_hop_operator(laplacian(g), 3);
  LQModel m(g, LQParams{}, mh);
  Rng rng(8);
  Mat x = random_states(rng, 2, 6);
  Mat expect = -(x * mh);
  EXPECT_LT((m.deviation(x) - expect).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NonLQModel, CubicDrift) {
  Graph g = make_graph(GraphKind::complete, 3);
  LQParams p;
  p.a = 0.1;
  LQModel m(g, p, true);
  EXPECT_EQ(m.kind(), ModelKind::nonlq);
  // States with zero deviation: drift reduces to the control.
  Mat x = Mat::Constant(1, 3, 0.9);
  Mat alpha(1, 3);
  alpha << 0.2, -0.4, 1.1;
  EXPECT_LT((m.drift(x, alpha) - alpha).cwiseAbs().maxCoeff(), 1e-14);
  // On K_3 the deviation of player 1 is mean(x2, x3) - x1; set it to 2.
  Mat y(1, 3);
  y << -2.0, 0.0, 0.0;
  EXPECT_NEAR(m.deviation(y)(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(m.drift(y, Mat::Zero(1, 3))(0, 0), 0.8, 1e-14);
}

TEST(NonLQModel, CubicExceedsLinearBeyondUnitDeviation) {
  Graph g = make_graph(GraphKind::star, 6);
  LQParams p;
  p.a = 0.5;
  LQModel lin(g, p), cub(g, p, true);
  Rng rng(13);
  Mat x = random_states(rng, 200, 6, -4.0, 4.0);
  Mat zero = Mat::Zero(200, 6);
  Mat dev = lin.deviation(x), bl = lin.drift(x, zero), bc = cub.drift(x, zero);
  int checked = 0;
  for (int r = 0; r < 200; ++r)
    for (int i = 0; i < 6; ++i)
      if (std::abs(dev(r, i)) > 1.0) {
        EXPECT_GT(std::abs(bc(r, i)), std::abs(bl(r, i)));
        ++checked;
      }
  EXPECT_GT(checked, 50);
}

TEST(PortfolioModel, ZeroCompetitionIsMerton) {
  Graph g = make_graph(GraphKind::cycle, 5);
  Rng rng(2);
  PortfolioParams p = fixed_portfolio(5, rng);
  p.theta.setZero();
  PortfolioModel m(g, p);
  Mat x = random_states(rng, 3, 5);
  Mat gT = m.terminal_cost(x);
  for (int r = 0; r < 3; ++r)
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(gT(r, i), std::exp(-x(r, i) / p.delta(i)), 1e-14);
}

TEST(PortfolioModel, ZeroWealthCostsOne) {
  Graph g = make_graph(GraphKind::star, 6);
  Rng rng(3);
  PortfolioModel m(g, fixed_portfolio(6, rng));
  Mat gT = m.terminal_cost(Mat::Zero(2, 6));
  EXPECT_LT((gT.array() - 1.0).abs().maxCoeff(), 1e-15);
  EXPECT_EQ(m.running_cost(Mat::Ones(2, 6), Mat::Ones(2, 6)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PortfolioModel, CostEqualsNegatedUtility) {
  Graph g = make_graph(GraphKind::random_spanning_tree, 9, 5);
  Rng rng(4);
  PortfolioParams p = fixed_portfolio(9, rng);
  PortfolioModel m(g, p);
  Mat x = random_states(rng, 6, 9);
  Mat gT = m.terminal_cost(x);
  Mat dev = m.deviation(x);
  for (int r = 0; r < 6; ++r)
    for (int i = 0; i < 9; ++i) {
      double xbar = x(r, i) + dev(r, i);
      double utility = -std::exp(-(x(r, i) - p.theta(i) * xbar) / p.delta(i));
      EXPECT_NEAR(gT(r, i), -utility, 1e-13 * std::abs(utility));
    }
}

TEST(PortfolioModel, ControlledCoefficients) {
  Graph g = make_graph(GraphKind::cycle, 4);
  Rng rng(6);
  PortfolioParams p = fixed_portfolio(4, rng);
  PortfolioModel m(g, p);
  Mat x = random_states(rng, 3, 4), a = random_states(rng, 3, 4);
  Mat b = m.drift(x, a), s = m.sigma(x, a), s0 = m.sigma0(x, a);
  for (int r = 0; r < 3; ++r)
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(b(r, i), p.mu(i) * a(r, i), 1e-15);
      EXPECT_NEAR(s(r, i), p.nu(i) * a(r, i), 1e-15);
      EXPECT_NEAR(s0(r, i), p.sigma(i) * a(r, i), 1e-15);
    }
  EXPECT_TRUE(m.controlled_diffusion());
  EXPECT_FALSE(m.has_minimizer());
}

TEST(PortfolioModel, NoMinimizer) {
  Graph g = make_graph(GraphKind::cycle, 4);
  Rng rng(6);
  PortfolioModel m(g, fixed_portfolio(4, rng));
  try {
    m.minimizer(Mat::Zero(1, 4), Mat::Zero(1, 4));
    FAIL() << "expected UnsupportedError";
  } catch (const UnsupportedError& e) {
    EXPECT_NE(std::string(e.what()).find("controlled diffusion"), std::string::npos);
  }
}

TEST(PortfolioModel, SampledParametersInRange) {
  Rng rng(17);
  PortfolioParams p = sample_portfolio_params(50, rng);
  auto in = [](const Eigen::VectorXd& v, double lo, double hi) {
    return (v.array() >= lo).all() && (v.array() <= hi).all();
  };
  EXPECT_TRUE(in(p.mu, 0.05, 0.1));
  EXPECT_TRUE(in(p.nu, 0.2, 0.25));
  EXPECT_TRUE(in(p.sigma, 0.15, 0.2));
  EXPECT_TRUE(in(p.delta, 0.8, 1.2));
  EXPECT_TRUE(in(p.theta, 0.4, 0.6));
}

TEST(PortfolioModel, RejectsBadParameters) {
  Graph g = make_graph(GraphKind::cycle, 4);
  Rng rng(1);
  PortfolioParams p = fixed_portfolio(4, rng);
  p.nu(2) = 0.0;
  EXPECT_THROW(PortfolioModel(g, p), ParameterError);
  p = fixed_portfolio(4, rng);
  p.mu.resize(3);
  EXPECT_THROW(PortfolioModel(g, p), ShapeError);
}

TEST(ModelKind, ParseRoundTrip) {
  for (ModelKind k : {ModelKind::lq, ModelKind::nonlq, ModelKind::portfolio})
    EXPECT_EQ(parse_model(to_string(k)), k);
  EXPECT_THROW(parse_model("mfg"), ParameterError);
}

// Zero strategies with a = q = 0: X_t = X_0 + sigma W_t per player, so the
// deviation is Gaussian plus a uniform start and its second moment is
// ||L e_i||^2 (delta0^2 / 3 + sigma^2 t).
TEST(LQModel, ZeroProfileCostMatchesGaussianMoments) {
  Graph g = make_graph(GraphKind::cycle, 6);
  LQParams p;
  p.a = 0.0;
  p.q = 0.0;
  p.eps = 1.0;
  p.c = 1.0;
  LQModel m(g, p);
  TimeGrid grid(p.T, 20);
  Strategy zero = [](double, const Mat& x) { return Mat::Zero(x.rows(), x.cols()); };
  CostEstimate est = expected_cost(m, zero, grid, 20000, Rng(99));
  Eigen::MatrixXd lap = laplacian(g);
  for (int i = 0; i < 6; ++i) {
    double w = lap.col(i).squaredNorm();
    double start = p.delta0 * p.delta0 / 3.0;
    double running = 0.0;
    for (int k = 0; k < grid.steps; ++k) running += grid.h() * w * (start + p.sigma * p.sigma * grid.time(k));
    double exact = 0.5 * p.eps * running + 0.5 * p.c * w * (start + p.sigma * p.sigma * p.T);
    EXPECT_NEAR(est.mean(i), exact, 4.0 * est.std_error(i)) << "player " << i;
  }
}

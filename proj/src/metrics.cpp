#include "ggl/metrics.hpp"

#include <cmath>

#include "ggl/errors.hpp"

namespace ggl {

void RmseAccumulator::add(const PathBundle& b, const PathBundle& c) {
  if (b.grid.steps != c.grid.steps || b.n_paths != c.n_paths || b.first_path != c.first_path)
    throw ShapeError("pathwise_rmse: bundles differ in grid or path count");
  if (!b.noise.empty() && !c.noise.empty())
    for (std::size_t k = 0; k < b.noise.size(); ++k)
      if (b.noise[k] != c.noise[k]) throw ParameterError("pathwise_rmse: bundles were driven by different noise");
  for (int k = 0; k < b.grid.steps; ++k) {
    dx_ += (b.states[k] - c.states[k]).squaredNorm();
    x_ += b.states[k].squaredNorm();
    da_ += (b.strategies[k] - c.strategies[k]).squaredNorm();
    a_ += b.strategies[k].squaredNorm();
  }
}

namespace {

double ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) throw NumericalError("pathwise_rmse: baseline is identically zero");
  return num / den;
}

}  // namespace

double RmseAccumulator::rmse_x() const { return ratio(dx_, x_); }
double RmseAccumulator::rmse_alpha() const { return ratio(da_, a_); }

std::pair<double, double> pathwise_rmse(const PathBundle& baseline, const PathBundle& candidate) {
  RmseAccumulator acc;
  acc.add(baseline, candidate);
  return {acc.rmse_x(), acc.rmse_alpha()};
}

std::pair<double, double> coupled_rmse(const GameModel& game, const Strategy& baseline, const Strategy& candidate,
                                       int fine_steps, int coarse_steps, int n_paths, const Rng& rng) {
  RmseAccumulator acc;
  simulate_coupled_blocks(game, baseline, candidate, fine_steps, coarse_steps, n_paths, rng,
                          [&](const PathBundle& f, const PathBundle& c) { acc.add(f, c); });
  return {acc.rmse_x(), acc.rmse_alpha()};
}

namespace {

// Per-path cost of every player for one block.
Mat path_costs(const GameModel& game, const PathBundle& b) {
  const double h = b.grid.h();
  Mat cost = game.terminal_cost(b.states[b.grid.steps]);
  for (int k = 0; k < b.grid.steps; ++k) cost += h * game.running_cost(b.states[k], b.strategies[k]);
  return cost;
}

struct Moments {
  Eigen::VectorXd sum, sq;
  long count = 0;
  void add(const Mat& c) {
    if (sum.size() == 0) {
      sum = Eigen::VectorXd::Zero(c.cols());
      sq = Eigen::VectorXd::Zero(c.cols());
    }
    sum += c.colwise().sum().transpose();
    sq += c.array().square().matrix().colwise().sum().transpose();
    count += c.rows();
  }
  CostEstimate estimate() const {
    CostEstimate e;
    e.mean = sum / count;
    Eigen::VectorXd var = (sq / count - e.mean.cwiseAbs2()).cwiseMax(0.0) * (count / std::max(1.0, count - 1.0));
    e.std_error = (var / count).cwiseSqrt();
    return e;
  }
};

}  // namespace

CostEstimate expected_cost(const GameModel& game, const Strategy& strategy, const TimeGrid& grid, int n_paths,
                           const Rng& rng) {
  Moments m;
  simulate_blocks(game, strategy, grid, n_paths, rng, [&](const PathBundle& b) { m.add(path_costs(game, b)); });
  return m.estimate();
}

double max_relative_error(const Eigen::VectorXd& vb, const Eigen::VectorXd& vc) {
  if (vb.size() != vc.size()) throw ShapeError("max_relative_error: size mismatch");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < vb.size(); ++i) {
    if (std::abs(vb(i)) < 1e-10)
      throw NumericalError("relative error undefined: baseline cost of player " + std::to_string(i + 1) +
                           " is below 1e-10 in magnitude");
    worst = std::max(worst, std::abs((vc(i) - vb(i)) / vb(i)));
  }
  return worst;
}

MetricResult mre(const GameModel& game, const Strategy& baseline, const Strategy& candidate, int fine_steps,
                 int coarse_steps, int n_paths, const Rng& rng) {
  Moments mb, mc;
  RmseAccumulator acc;
  const int ratio = fine_steps / std::max(1, coarse_steps);
  simulate_coupled_blocks(game, baseline, candidate, fine_steps, coarse_steps, n_paths, rng,
                          [&](const PathBundle& f, const PathBundle& held) {
                            acc.add(f, held);
                            mb.add(path_costs(game, f));
                            // Cost the candidate on its own coarse grid.
                            PathBundle coarse;
                            coarse.grid = TimeGrid(game.horizon(), coarse_steps);
                            coarse.n_paths = held.n_paths;
                            coarse.first_path = held.first_path;
                            for (int k = 0; k <= coarse_steps; ++k) coarse.states.push_back(held.states[k * ratio]);
                            for (int k = 0; k < coarse_steps; ++k)
                              coarse.strategies.push_back(held.strategies[k * ratio]);
                            mc.add(path_costs(game, coarse));
                          });
  MetricResult out;
  out.rmse_x = acc.rmse_x();
  out.rmse_alpha = acc.rmse_alpha();
  out.v_baseline = mb.estimate().mean;
  out.v_candidate = mc.estimate().mean;
  out.mre = max_relative_error(out.v_baseline, out.v_candidate);
  return out;
}

}  // namespace ggl

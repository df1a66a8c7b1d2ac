#pragma once

#include <Eigen/Dense>

#include "ggl/games.hpp"
#include "ggl/sdesim.hpp"

namespace ggl {

struct MetricResult {
  double rmse_x = 0.0;
  double rmse_alpha = 0.0;
  double mre = 0.0;
  Eigen::VectorXd v_baseline;   // V-hat per player
  Eigen::VectorXd v_candidate;  // V-tilde per player
};

// Running sums of the pathwise squared errors over players, paths and the
// left nodes of the fine grid.
class RmseAccumulator {
 public:
  void add(const PathBundle& baseline, const PathBundle& candidate);
  double rmse_x() const;
  double rmse_alpha() const;

 private:
  double dx_ = 0.0, x_ = 0.0, da_ = 0.0, a_ = 0.0;
};

// sum (X_hat - X_tilde)^2 / sum X_hat^2 and the same for the controls.
std::pair<double, double> pathwise_rmse(const PathBundle& baseline, const PathBundle& candidate);

// Coupled simulation followed by pathwise_rmse, streamed block by block.
std::pair<double, double> coupled_rmse(const GameModel& game, const Strategy& baseline, const Strategy& candidate,
                                       int fine_steps, int coarse_steps, int n_paths, const Rng& rng);

struct CostEstimate {
  Eigen::VectorXd mean;       // per player
  Eigen::VectorXd std_error;  // per player
};

// Monte-Carlo J^i: mean over paths of sum_k f^i(X_k, a_k) h + g^i(X_T).
CostEstimate expected_cost(const GameModel& game, const Strategy& strategy, const TimeGrid& grid, int n_paths,
                           const Rng& rng);

// Baseline costed on the fine grid, candidate on the coarse grid, with the
// coarse shocks aggregated from the fine ones. Throws NumericalError when
// some |V-hat^i| < 1e-10.
MetricResult mre(const GameModel& game, const Strategy& baseline, const Strategy& candidate, int fine_steps,
                 int coarse_steps, int n_paths, const Rng& rng);

// max_i |(v_candidate_i - v_baseline_i) / v_baseline_i|
double max_relative_error(const Eigen::VectorXd& v_baseline, const Eigen::VectorXd& v_candidate);

}  // namespace ggl

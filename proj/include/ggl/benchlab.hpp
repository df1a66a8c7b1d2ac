#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ggl/autodiff.hpp"
#include "ggl/games.hpp"
#include "ggl/graph.hpp"
#include "ggl/nets.hpp"
#include "ggl/rng.hpp"

namespace ggl {

// lq: player 1's equilibrium feedback at t = 0; lqmh: the same with L replaced
// by the multi-hop operator; nl: quadratic graph form; nlm: nonlinear mixture.
enum class TargetId { lq, lqmh, nl, nlm };
TargetId parse_target(const std::string& s);
std::string to_string(TargetId id);
int case_index(TargetId id);  // 1..4, scales epochs and learning rates

struct TargetFunction {
  TargetId id = TargetId::lq;
  int n = 0;
  int ell = 3;
  std::function<Mat(const Mat&)> eval;  // B x N -> B x 1

  Mat operator()(const Mat& x) const { return eval(x); }
  double at(const Eigen::VectorXd& x) const;
};

// N = 10 style parameter set: T = 1, a = 0.1, sigma = 0.5, q = 0, eps = 1, c = 1.
LQParams benchmark_lq_params();

// The Riccati system is re-solved on the given graph for lq and lqmh.
TargetFunction make_target(TargetId id, const Graph& g, const LQParams& p = benchmark_lq_params(), int ell = 3);

// One point per stratum [k/n, (k+1)/n) in every dimension, strata permuted
// independently per dimension, uniform jitter inside each stratum.
Mat lhs_sample(int n, int dim, Rng& rng);

// sum (pred - truth)^2 / (sum truth^2 + delta)
double relative_rmse(const Mat& pred, const Mat& truth, double delta = 1e-8);

struct SupervisedHyper {
  int epochs = 2000;
  int batch = 256;
  double lr = 0.001;
  bool scheduled = false;  // step decay per epoch (Chebyshev networks)
  int tau = 500;
  double gamma = 0.5;
  int n_test = 25000;
  double delta = 1e-8;

  // Epochs 2000 j for case j and the per-architecture learning-rate table.
  static SupervisedHyper for_case(ArchKind arch, TargetId id);
};

// Architectures of the supervised benchmark: FNN [N,32,32,1] tanh, NTM
// K = 3, M = 3 ReLU for the given player, Chebyshev [1,64,1] ReLU.
NetworkSpec supervised_spec(ArchKind arch, int n, int player = 0, int ntm_depth = 3);

struct ScoreResult {
  double rmse = 0.0;
  int epochs = 0;       // epochs actually run
  bool diverged = false;
  double final_loss = 0.0;
};

// Trains a fresh network from the spec on LHS batches and scores it on a
// fresh LHS test set. A non-finite loss or gradient stops training; the run
// is then reported as diverged with an infinite RMSE.
ScoreResult train_and_score(const NetworkSpec& spec, const Graph& g, const TargetFunction& target,
                            const SupervisedHyper& hyper, const Rng& rng);

struct BenchmarkCell {
  ArchKind arch = ArchKind::ntm;
  GraphKind graph = GraphKind::star;
  TargetId target = TargetId::lq;
  int player = 0;
  int ntm_depth = 3;
};

struct BenchmarkRow {
  BenchmarkCell cell;
  int run = 0;
  uint64_t seed = 0;
  ScoreResult score;
  double wall_ms = 0.0;
};

struct Summary {
  double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};
Summary summarize(std::vector<double> values);

struct BenchmarkOptions {
  int n = 10;
  uint64_t graph_seed = 0;  // random spanning tree draw
  int n_runs = 20;
  uint64_t seed = 0;
  int threads = 1;
  double epoch_scale = 1.0;  // multiplies the per-case epoch counts
  int n_test = 25000;
};

struct BenchmarkReport {
  std::vector<BenchmarkCell> cells;
  int n_runs = 0;
  std::vector<BenchmarkRow> rows;  // cell-major, then run

  std::vector<double> rmse(int cell) const;
  Summary summary(int cell) const;
  // Columns arch,graph,target,run,seed,final_rmse,epochs and wall_ms when
  // timing is requested (wall times are not reproducible).
  void write_csv(std::ostream& os, bool with_wall_ms) const;
  void write_summary(std::ostream& os) const;
};

// Runs are independent (own network, tape and RNG substream) and are spread
// over worker threads; results do not depend on the thread count.
BenchmarkReport run_benchmark(const std::vector<BenchmarkCell>& cells, const BenchmarkOptions& opt);

std::string cell_label(const BenchmarkCell& c);

}  // namespace ggl

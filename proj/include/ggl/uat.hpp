#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ggl/graph.hpp"
#include "ggl/nets.hpp"
#include "ggl/rng.hpp"

namespace ggl {

// Best-response map A(x, a) of a static game on a graph. States are blocks of
// d_in coordinates per player and actions blocks of d_out coordinates.
struct ContractionGame {
  explicit ContractionGame(Graph g) : graph(std::move(g)) {}

  Graph graph;
  int d_in = 1;
  int d_out = 1;
  double rho = 0.5;  // contraction modulus in the sup norm
  double x_lo = -1.0, x_hi = 1.0;
  double a_lo = -1.0, a_hi = 1.0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& a)> best_response;
};

// One-hidden-layer ReLU surrogate of the best response, per player i:
//   sum_r beta[i][r] .* relu(gamma_x[i][r] x + gamma_a[i][r] a + eta[i][r]).
// gamma_x[i][r] is d_out x (N d_in) and may be nonzero only on the blocks of
// {i} and its neighbors; gamma_a[i][r] is d_out x (N d_out), neighbors only.
struct BestResponseNet {
  int n = 0, channels = 0, d_in = 1, d_out = 1;
  std::vector<std::vector<Eigen::VectorXd>> beta, eta;
  std::vector<std::vector<Eigen::MatrixXd>> gamma_x, gamma_a;

  BestResponseNet() = default;
  BestResponseNet(int n, int channels, int d_in, int d_out);
  Eigen::VectorXd apply(const Eigen::VectorXd& x, const Eigen::VectorXd& a) const;
  // Throws if any weight falls outside the graph's index sets.
  void validate(const Graph& g) const;
};

using BestResponseFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& a)>;

// K applications of A starting from the zero profile.
Eigen::VectorXd fixed_point_iterate(const BestResponseFn& map, const Eigen::VectorXd& x, int k, int action_dim);
Eigen::VectorXd fixed_point_iterate(const ContractionGame& game, const Eigen::VectorXd& x, int k);

// Iterates until successive profiles agree to tol in the sup norm.
Eigen::VectorXd equilibrium(const ContractionGame& game, const Eigen::VectorXd& x, double tol = 1e-14,
                            int max_iter = 10000);

// NTM with d = d_in + d_out whose player-i output equals the (K-1)-th
// iterate of the surrogate best response.
std::unique_ptr<NTM> construct_ntm(const Graph& g, const BestResponseNet& br, int depth, int player,
                                   Activation activation = Activation::relu);

struct ContractionFamily {
  ContractionGame game;
  BestResponseNet surrogate;
  double delta = 0.0;  // sup |surrogate - A| on the domain
};

// A_i(x, a) = kappa_i x_i + mu_i + rho * mean of neighbour actions; the
// surrogate is exact (delta = 0) with two channels.
ContractionFamily linear_contraction_family(const Graph& g, double rho, uint64_t seed, int channels = 2);

// A_i(x, a) = tanh(kappa x_i + rho * mean of neighbour actions); the surrogate
// is the piecewise-linear interpolant of tanh on `knots` intervals, with delta
// measured on a dense grid of the scalar argument.
ContractionFamily tanh_contraction_family(const Graph& g, double rho, double kappa, int knots);

// Largest observed ||A(x,a) - A(x,b)|| / ||a - b|| over random triples.
double certify_rho(const ContractionGame& game, int samples, Rng& rng);

struct UatRow {
  int depth = 0;
  double sup_error = 0.0;       // max over samples and players of |NTM - equilibrium|
  double bound = 0.0;           // max over samples of delta/(1-rho) + rho^(K-1) ||equilibrium||
  double iterate_mismatch = 0;  // max |NTM - surrogate iterate|
  bool pass = false;            // pointwise bound held on every sample, up to 1e-12
};

std::vector<UatRow> uat_check(const ContractionFamily& family, const std::vector<int>& depths, int samples,
                              Rng& rng);

}  // namespace ggl

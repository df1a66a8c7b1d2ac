#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ggl/autodiff.hpp"
#include "ggl/games.hpp"

namespace ggl {

// Quadratic value functions v^i(t,x) = x^T P^i_t x / 2 + r^i_t of the graph LQ
// game on a uniform grid of [0, T].
struct RiccatiSolution {
  double T = 1.0;
  int steps = 0;
  double q = 0.0;
  Eigen::MatrixXd interaction;               // M (L or a multi-hop operator)
  std::vector<std::vector<Eigen::MatrixXd>> P;  // P[k][i] at t_k = k T / steps
  std::vector<Eigen::VectorXd> r;            // r[k](i)
  std::vector<Eigen::MatrixXd> feedback;     // F_k with alpha = F_k x

  int n() const { return static_cast<int>(interaction.rows()); }
  double time(int k) const { return T * k / steps; }
  // Feedback matrix interpolated linearly between grid nodes.
  Eigen::MatrixXd feedback_at(double t) const;
  // alpha for a batch of states (rows of x).
  Mat strategy(double t, const Mat& x) const;
  double value(int player, double t, const Eigen::VectorXd& x) const;
};

// Backward RK4 integration of
//   dP^i/dt = D^T P^i + P^i D - p_i^T p_i - (eps - q^2) m_i^T m_i,  P^i_T = c m_i^T m_i
//   dr^i/dt = -sigma^2 tr(P^i) / 2,                                  r^i_T = 0
// with D = (a + q) M + Pi, row k of Pi equal to row k of P^k, m_i row i of M.
// Throws NumericalError when any |P| entry exceeds 1e6.
RiccatiSolution solve_lq_riccati(const LQModel& model, int steps = 1000);

// alpha^i = -q (M x)_i - (P^i_t x)_i
Mat lq_baseline_feedback(const RiccatiSolution& sol, double t, const Mat& x);

// Complete-graph reduction: eta' = 2(a+q) s eta + (1 - 1/N^2) eta^2 - (eps - q^2) s^2,
// eta_T = c s^2 with s = N/(N-1); then (P^i x)_i = ((N-1)/N)^2 eta (L x)_i.
struct ScalarRiccati {
  int n = 0;
  double T = 1.0;
  int steps = 0;
  std::vector<double> eta;
  double gain(int k) const;  // coefficient multiplying (L x)_i in (P^i x)_i
};
ScalarRiccati solve_complete_graph_riccati(int n, const LQParams& p, int steps = 1000);

// Max over players of |d_t v + b(x, alpha) . grad v + f + sigma^2 tr(P)/2| at
// grid node k, with each player's own control from the model's minimizer and
// the others' from the feedback. d_t P uses a five-point stencil on the grid.
double hjb_residual(const LQModel& model, const RiccatiSolution& sol, int k, const Eigen::VectorXd& x);

struct PortfolioBaseline {
  Eigen::VectorXd alpha;  // constant equilibrium investment per player
  Eigen::VectorXd kappa;  // rho^i_t = exp(kappa_i (T - t))
  double residual = 0.0;  // sup-norm residual of the linear system
  double T = 1.0;
  double rho(int player, double t) const;
};

enum class KappaForm {
  derived,    // variance of the certainty-equivalent exponent
  displayed,  // second sum written as -theta^2 sum w_j nu_j^2 alpha_j^2
};

// (nu_i^2 + sigma_i^2) alpha_i - sigma_i theta_i sum_j w_ij sigma_j alpha_j = delta_i mu_i
// with w_ij = -L_ji for j != i.
PortfolioBaseline portfolio_constant_ne(const PortfolioModel& model, KappaForm form = KappaForm::derived);

// E[exp(-y_i / delta_i)] over X_0 ~ U(-d0, d0)^N times rho^i_0, where
// y_i = (1 - theta_i) x_i + theta_i (L x)_i.
double portfolio_ansatz_value(const PortfolioModel& model, const PortfolioBaseline& b, int player);

// Rows t,player,P_11,P_12,...,P_NN (row-major) every `stride` grid nodes.
void write_riccati_csv(std::ostream& os, const RiccatiSolution& sol, int stride = 1);
// Header alpha_1..alpha_N,kappa_1..kappa_N and one data row.
void write_portfolio_csv(std::ostream& os, const PortfolioBaseline& b);

}  // namespace ggl

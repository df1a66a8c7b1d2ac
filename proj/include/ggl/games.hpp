#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>

#include "ggl/autodiff.hpp"
#include "ggl/graph.hpp"
#include "ggl/rng.hpp"

namespace ggl {

enum class ModelKind { lq, nonlq, portfolio };
ModelKind parse_model(const std::string& s);
std::string to_string(ModelKind m);

struct LQParams {
  double a = 0.1;
  double sigma = 0.5;
  double q = 0.0;
  double eps = 1.0;
  double c = 1.0;
  double delta0 = 0.5;
  double T = 1.0;
};

struct PortfolioParams {
  Eigen::VectorXd mu, nu, sigma, delta, theta;
  double delta0 = 0.3;
  double T = 1.0;
};

// mu ~ U(0.05, 0.1), nu ~ U(0.2, 0.25), sigma ~ U(0.15, 0.2),
// delta ~ U(0.8, 1.2), theta ~ U(0.4, 0.6), drawn once per run.
PortfolioParams sample_portfolio_params(int n, Rng& rng);

// Batched game coefficients. States and controls are B x N (one row per
// path, one column per player). Every per-player quantity is returned as a
// B x N matrix whose column i belongs to player i.
class GameModel {
 public:
  virtual ~GameModel() = default;

  virtual ModelKind kind() const = 0;
  const Graph& graph() const { return graph_; }
  int n() const { return graph_.n(); }
  double horizon() const { return horizon_; }
  double delta0() const { return delta0_; }
  // Symmetric matrix M whose rows define the neighbourhood deviation -Mx.
  const Mat& interaction() const { return interaction_; }

  // x_bar^(-i) - x^i = -(M x)_i for every player.
  Mat deviation(const Mat& x) const { return -(x * interaction_); }
  Var deviation(Tape& t, Var x) const { return matmul(x, t.constant(Mat(-interaction_))); }

  virtual Mat drift(const Mat& x, const Mat& alpha) const = 0;
  virtual Mat sigma(const Mat& x, const Mat& alpha) const = 0;   // idiosyncratic
  virtual Mat sigma0(const Mat& x, const Mat& alpha) const = 0;  // common noise
  virtual Mat running_cost(const Mat& x, const Mat& alpha) const = 0;
  virtual Mat terminal_cost(const Mat& x) const = 0;

  virtual bool has_minimizer() const { return false; }
  // Explicit Hamiltonian minimizer given z_i (column i of z) for each player.
  virtual Mat minimizer(const Mat& x, const Mat& z) const;

  // Differentiable versions used by the training losses.
  virtual Var drift(Tape& t, Var x, Var alpha) const = 0;
  // sigma * sqrt(h) * xi + sigma0 * sqrt(h) * xi0, with xi B x N and xi0 B x 1.
  virtual Var noise(Tape& t, Var x, Var alpha, const Mat& xi, const Mat& xi0, double sqrt_h) const = 0;
  // Player i's running cost (B x 1) given its own control (B x 1).
  virtual Var running_cost(Tape& t, Var x, Var alpha_i, int i) const = 0;
  virtual Var terminal_cost(Tape& t, Var x, int i) const = 0;
  virtual Var minimizer(Tape& t, Var x, Var z_i, int i) const;

  // True when the control enters the diffusion coefficients.
  virtual bool controlled_diffusion() const { return false; }

 protected:
  GameModel(Graph g, double horizon, double delta0);
  Graph graph_;
  double horizon_;
  double delta0_;
  Mat interaction_;
};

// Drift a * dev + alpha (linear) or a * dev^3 + alpha (cubic), constant sigma,
// f = alpha^2/2 - q alpha dev + (eps/2) dev^2, g = (c/2) dev^2.
class LQModel : public GameModel {
 public:
  LQModel(const Graph& g, const LQParams& p, bool cubic = false);
  // Same model with the deviation built from an arbitrary symmetric matrix
  // (e.g. the multi-hop operator) instead of L.
  LQModel(const Graph& g, const LQParams& p, const Eigen::MatrixXd& interaction, bool cubic = false);

  ModelKind kind() const override { return cubic_ ? ModelKind::nonlq : ModelKind::lq; }
  const LQParams& params() const { return p_; }
  bool cubic() const { return cubic_; }

  Mat drift(const Mat& x, const Mat& alpha) const override;
  Mat sigma(const Mat& x, const Mat& alpha) const override;
  Mat sigma0(const Mat& x, const Mat& alpha) const override;
  Mat running_cost(const Mat& x, const Mat& alpha) const override;
  Mat terminal_cost(const Mat& x) const override;
  bool has_minimizer() const override { return true; }
  Mat minimizer(const Mat& x, const Mat& z) const override;

  Var drift(Tape& t, Var x, Var alpha) const override;
  Var noise(Tape& t, Var x, Var alpha, const Mat& xi, const Mat& xi0, double sqrt_h) const override;
  Var running_cost(Tape& t, Var x, Var alpha_i, int i) const override;
  Var terminal_cost(Tape& t, Var x, int i) const override;
  Var minimizer(Tape& t, Var x, Var z_i, int i) const override;

 private:
  LQParams p_;
  bool cubic_;
};

// dX^i = mu_i a^i dt + nu_i a^i dW^i + sigma_i a^i dW^0, no running cost,
// terminal cost exp(-((1 - theta_i) x^i + theta_i (L x)_i) / delta_i).
class PortfolioModel : public GameModel {
 public:
  PortfolioModel(const Graph& g, const PortfolioParams& p);

  ModelKind kind() const override { return ModelKind::portfolio; }
  const PortfolioParams& params() const { return p_; }

  Mat drift(const Mat& x, const Mat& alpha) const override;
  Mat sigma(const Mat& x, const Mat& alpha) const override;
  Mat sigma0(const Mat& x, const Mat& alpha) const override;
  Mat running_cost(const Mat& x, const Mat& alpha) const override;
  Mat terminal_cost(const Mat& x) const override;

  Var drift(Tape& t, Var x, Var alpha) const override;
  Var noise(Tape& t, Var x, Var alpha, const Mat& xi, const Mat& xi0, double sqrt_h) const override;
  Var running_cost(Tape& t, Var x, Var alpha_i, int i) const override;
  Var terminal_cost(Tape& t, Var x, int i) const override;

  bool controlled_diffusion() const override { return true; }

 private:
  Mat row(const Eigen::VectorXd& v) const { return v.transpose(); }
  PortfolioParams p_;
};

std::unique_ptr<GameModel> lq_model(const Graph& g, const LQParams& p);
std::unique_ptr<GameModel> nonlq_model(const Graph& g, const LQParams& p);
std::unique_ptr<GameModel> portfolio_model(const Graph& g, const PortfolioParams& p);

}  // namespace ggl

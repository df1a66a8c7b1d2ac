#include "ggl/games.hpp"

#include <cmath>

#include "ggl/errors.hpp"

namespace ggl {

ModelKind parse_model(const std::string& s) {
  if (s == "lq") return ModelKind::lq;
  if (s == "nonlq") return ModelKind::nonlq;
  if (s == "portfolio") return ModelKind::portfolio;
  throw ParameterError("unknown model '" + s + "'");
}

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::lq: return "lq";
    case ModelKind::nonlq: return "nonlq";
    case ModelKind::portfolio: return "portfolio";
  }
  return "?";
}

PortfolioParams sample_portfolio_params(int n, Rng& rng) {
  PortfolioParams p;
  auto draw = [&](double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
    return v;
  };
  p.mu = draw(0.05, 0.1);
  p.nu = draw(0.2, 0.25);
  p.sigma = draw(0.15, 0.2);
  p.delta = draw(0.8, 1.2);
  p.theta = draw(0.4, 0.6);
  return p;
}

GameModel::GameModel(Graph g, double horizon, double delta0)
    : graph_(std::move(g)), horizon_(horizon), delta0_(delta0), interaction_(laplacian(graph_)) {
  if (!(horizon > 0.0)) throw ParameterError("horizon T must be positive");
  if (!(delta0 >= 0.0)) throw ParameterError("initial half-width delta0 must be nonnegative");
}

Mat GameModel::minimizer(const Mat&, const Mat&) const {
  throw UnsupportedError(to_string(kind()) + " model has no explicit Hamiltonian minimizer (controlled diffusion)");
}

Var GameModel::minimizer(Tape&, Var, Var, int) const {
  throw UnsupportedError(to_string(kind()) + " model has no explicit Hamiltonian minimizer (controlled diffusion)");
}

namespace {

void check_lq(const LQParams& p) {
  if (!(p.sigma > 0.0)) throw ParameterError("LQ model needs sigma > 0");
  if (p.eps < p.q * p.q) throw ParameterError("LQ model needs eps >= q^2");
  if (p.c < 0.0) throw ParameterError("LQ model needs c >= 0");
}

}  // namespace

LQModel::LQModel(const Graph& g, const LQParams& p, bool cubic) : GameModel(g, p.T, p.delta0), p_(p), cubic_(cubic) {
  check_lq(p_);
}

LQModel::LQModel(const Graph& g, const LQParams& p, const Eigen::MatrixXd& interaction, bool cubic)
    : LQModel(g, p, cubic) {
  if (interaction.rows() != g.n() || interaction.cols() != g.n())
    throw ShapeError("interaction matrix must be N x N");
  if ((interaction - interaction.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ParameterError("interaction matrix must be symmetric");
  interaction_ = interaction;
}

Mat LQModel::drift(const Mat& x, const Mat& alpha) const {
  Mat dev = deviation(x);
  if (cubic_) return p_.a * dev.array().cube().matrix() + alpha;
  return p_.a * dev + alpha;
}

Mat LQModel::sigma(const Mat& x, const Mat&) const { return Mat::Constant(x.rows(), x.cols(), p_.sigma); }

Mat LQModel::sigma0(const Mat& x, const Mat&) const { return Mat::Zero(x.rows(), x.cols()); }

Mat LQModel::running_cost(const Mat& x, const Mat& alpha) const {
  Mat dev = deviation(x);
  return (0.5 * alpha.array().square() - p_.q * alpha.array() * dev.array() + 0.5 * p_.eps * dev.array().square())
      .matrix();
}

Mat LQModel::terminal_cost(const Mat& x) const { return (0.5 * p_.c * deviation(x).array().square()).matrix(); }

Mat LQModel::minimizer(const Mat& x, const Mat& z) const { return p_.q * deviation(x) - z / p_.sigma; }

Var LQModel::drift(Tape& t, Var x, Var alpha) const {
  Var dev = deviation(t, x);
  return add(scale(cubic_ ? power(dev, 3.0) : dev, p_.a), alpha);
}

Var LQModel::noise(Tape& t, Var, Var, const Mat& xi, const Mat&, double sqrt_h) const {
  return t.constant(Mat(p_.sigma * sqrt_h * xi));
}

Var LQModel::running_cost(Tape& t, Var x, Var alpha_i, int i) const {
  Var dev = slice(deviation(t, x), i, 1);
  Var out = scale(square(alpha_i), 0.5);
  if (p_.q != 0.0) out = sub(out, scale(hadamard(alpha_i, dev), p_.q));
  return add(out, scale(square(dev), 0.5 * p_.eps));
}

Var LQModel::terminal_cost(Tape& t, Var x, int i) const {
  return scale(square(slice(deviation(t, x), i, 1)), 0.5 * p_.c);
}

Var LQModel::minimizer(Tape& t, Var x, Var z_i, int i) const {
  Var out = scale(z_i, -1.0 / p_.sigma);
  if (p_.q != 0.0) out = add(out, scale(slice(deviation(t, x), i, 1), p_.q));
  return out;
}

PortfolioModel::PortfolioModel(const Graph& g, const PortfolioParams& p) : GameModel(g, p.T, p.delta0), p_(p) {
  const Eigen::Index n = g.n();
  for (const Eigen::VectorXd* v : {&p_.mu, &p_.nu, &p_.sigma, &p_.delta, &p_.theta})
    if (v->size() != n) throw ShapeError("portfolio parameters must have one entry per player");
  if ((p_.nu.array() <= 0.0).any() || (p_.sigma.array() <= 0.0).any() || (p_.delta.array() <= 0.0).any() ||
      (p_.theta.array() < 0.0).any())
    throw ParameterError("portfolio parameters must satisfy nu, sigma, delta > 0 and theta >= 0");
}

Mat PortfolioModel::drift(const Mat&, const Mat& alpha) const {
  return (alpha.array().rowwise() * p_.mu.transpose().array()).matrix();
}

Mat PortfolioModel::sigma(const Mat&, const Mat& alpha) const {
  return (alpha.array().rowwise() * p_.nu.transpose().array()).matrix();
}

Mat PortfolioModel::sigma0(const Mat&, const Mat& alpha) const {
  return (alpha.array().rowwise() * p_.sigma.transpose().array()).matrix();
}

Mat PortfolioModel::running_cost(const Mat& x, const Mat&) const { return Mat::Zero(x.rows(), x.cols()); }

Mat PortfolioModel::terminal_cost(const Mat& x) const {
  Mat lx = x * interaction_;
  Mat y = (x.array().rowwise() * (1.0 - p_.theta.transpose().array())).matrix() +
          (lx.array().rowwise() * p_.theta.transpose().array()).matrix();
  return (-(y.array().rowwise() / p_.delta.transpose().array())).exp().matrix();
}

Var PortfolioModel::drift(Tape& t, Var, Var alpha) const { return hadamard(alpha, t.constant(row(p_.mu))); }

Var PortfolioModel::noise(Tape& t, Var, Var alpha, const Mat& xi, const Mat& xi0, double sqrt_h) const {
  Mat coeff = (xi.array().rowwise() * p_.nu.transpose().array()).matrix();
  coeff += xi0 * row(p_.sigma);
  return hadamard(alpha, t.constant(Mat(sqrt_h * coeff)));
}

Var PortfolioModel::running_cost(Tape& t, Var x, Var, int) const { return t.constant(Mat::Zero(x.rows(), 1)); }

Var PortfolioModel::terminal_cost(Tape& t, Var x, int i) const {
  Mat w = p_.theta(i) * Mat(interaction_.col(i));
  w(i, 0) += 1.0 - p_.theta(i);
  return exp(scale(matmul(x, t.constant(w)), -1.0 / p_.delta(i)));
}

std::unique_ptr<GameModel> lq_model(const Graph& g, const LQParams& p) { return std::make_unique<LQModel>(g, p); }

std::unique_ptr<GameModel> nonlq_model(const Graph& g, const LQParams& p) {
  return std::make_unique<LQModel>(g, p, true);
}

std::unique_ptr<GameModel> portfolio_model(const Graph& g, const PortfolioParams& p) {
  return std::make_unique<PortfolioModel>(g, p);
}

}  // namespace ggl

#include "ggl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ggl/errors.hpp"
#include "ggl/format.hpp"

namespace ggl {

namespace {

using Mats = std::vector<Eigen::MatrixXd>;

Mats riccati_rhs(const Mats& p, const Eigen::MatrixXd& m, double a, double q, double eps) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd pi(n, n);
  for (Eigen::Index k = 0; k < n; ++k) pi.row(k) = p[k].row(k);
  Eigen::MatrixXd d = (a + q) * m + pi;
  Mats out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd pr = p[i].row(i);
    Eigen::RowVectorXd mr = m.row(i);
    out[i] = d.transpose() * p[i] + p[i] * d - pr.transpose() * pr - (eps - q * q) * mr.transpose() * mr;
  }
  return out;
}

Mats axpy(const Mats& x, double s, const Mats& y) {
  Mats out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + s * y[i];
  return out;
}

Eigen::MatrixXd feedback_matrix(const Mats& p, const Eigen::MatrixXd& m, double q) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd f(n, n);
  for (Eigen::Index i = 0; i < n; ++i) f.row(i) = -q * m.row(i) - p[i].row(i);
  return f;
}

}  // namespace

RiccatiSolution solve_lq_riccati(const LQModel& model, int steps) {
  if (steps < 1) throw ParameterError("Riccati grid needs at least one step");
  const LQParams& p = model.params();
  if (p.eps < p.q * p.q) throw ParameterError("Riccati system needs eps >= q^2");
  const Eigen::MatrixXd m = model.interaction();
  const Eigen::Index n = m.rows();
  RiccatiSolution sol;
  sol.T = p.T;
  sol.steps = steps;
  sol.q = p.q;
  sol.interaction = m;
  sol.P.assign(steps + 1, Mats(n));
  sol.r.assign(steps + 1, Eigen::VectorXd::Zero(n));
  for (Eigen::Index i = 0; i < n; ++i) sol.P[steps][i] = p.c * m.row(i).transpose() * m.row(i);

  const double h = p.T / steps;
  auto rhs = [&](const Mats& x) { return riccati_rhs(x, m, p.a, p.q, p.eps); };
  auto trace_rate = [&](const Mats& x) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = -0.5 * p.sigma * p.sigma * x[i].trace();
    return v;
  };
  for (int k = steps; k > 0; --k) {
    // Integrate backward: dP/ds = -rhs with s = T - t.
    const Mats& y = sol.P[k];
    Mats k1 = rhs(y);
    Mats y2 = axpy(y, -0.5 * h, k1);
    Mats k2 = rhs(y2);
    Mats y3 = axpy(y, -0.5 * h, k2);
    Mats k3 = rhs(y3);
    Mats y4 = axpy(y, -h, k3);
    Mats k4 = rhs(y4);
    Mats next(n);
    for (Eigen::Index i = 0; i < n; ++i) next[i] = y[i] - h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    Eigen::VectorXd dr = trace_rate(y) + 2.0 * trace_rate(y2) + 2.0 * trace_rate(y3) + trace_rate(y4);
    sol.r[k - 1] = sol.r[k] - h / 6.0 * dr;
    for (Eigen::Index i = 0; i < n; ++i) {
      next[i] = 0.5 * (next[i] + next[i].transpose());
      if (!next[i].allFinite() || next[i].cwiseAbs().maxCoeff() > 1e6)
        throw NumericalError("Riccati solution blows up at t = " + std::to_string(h * (k - 1)) +
                             "; shorten the horizon or change the parameters");
    }
    sol.P[k - 1] = std::move(next);
  }
  sol.feedback.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) sol.feedback[k] = feedback_matrix(sol.P[k], m, p.q);
  return sol;
}

Eigen::MatrixXd RiccatiSolution::feedback_at(double t) const {
  if (t < -1e-12 || t > T + 1e-12)
    throw ParameterError("feedback requested at t = " + std::to_string(t) + " outside [0, T]");
  double s = std::clamp(t / T * steps, 0.0, static_cast<double>(steps));
  int k = std::min(static_cast<int>(std::floor(s)), steps - 1);
  double w = s - k;
  return (1.0 - w) * feedback[k] + w * feedback[k + 1];
}

Mat RiccatiSolution::strategy(double t, const Mat& x) const { return x * feedback_at(t).transpose(); }

double RiccatiSolution::value(int player, double t, const Eigen::VectorXd& x) const {
  double s = std::clamp(t / T * steps, 0.0, static_cast<double>(steps));
  int k = std::min(static_cast<int>(std::floor(s)), steps - 1);
  double w = s - k;
  Eigen::MatrixXd p = (1.0 - w) * P[k][player] + w * P[k + 1][player];
  double r0 = (1.0 - w) * r[k](player) + w * r[k + 1](player);
  return 0.5 * x.dot(p * x) + r0;
}

Mat lq_baseline_feedback(const RiccatiSolution& sol, double t, const Mat& x) { return sol.strategy(t, x); }

double ScalarRiccati::gain(int k) const {
  const double f = static_cast<double>(n - 1) / n;
  return f * f * eta.at(k);
}

ScalarRiccati solve_complete_graph_riccati(int n, const LQParams& p, int steps) {
  if (n < 2) throw ParameterError("complete graph needs n >= 2");
  const double s = static_cast<double>(n) / (n - 1);
  const double coef = 1.0 - 1.0 / (static_cast<double>(n) * n);
  auto f = [&](double eta) { return 2.0 * (p.a + p.q) * s * eta + coef * eta * eta - (p.eps - p.q * p.q) * s * s; };
  ScalarRiccati out;
  out.n = n;
  out.T = p.T;
  out.steps = steps;
  out.eta.assign(steps + 1, 0.0);
  out.eta[steps] = p.c * s * s;
  const double h = p.T / steps;
  for (int k = steps; k > 0; --k) {
    double y = out.eta[k];
    double k1 = f(y), k2 = f(y - 0.5 * h * k1), k3 = f(y - 0.5 * h * k2), k4 = f(y - h * k3);
    out.eta[k - 1] = y - h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return out;
}

namespace {

// Five-point first-derivative weights (times 12 h) at position o of a stencil
// of five consecutive nodes.
constexpr double kStencil[5][5] = {{-25, 48, -36, 16, -3},
                                   {-3, -10, 18, -6, 1},
                                   {1, -8, 0, 8, -1},
                                   {-1, 6, -18, 10, 3},
                                   {3, -16, 36, -48, 25}};

}  // namespace

double hjb_residual(const LQModel& model, const RiccatiSolution& sol, int k, const Eigen::VectorXd& x) {
  const int n = sol.n();
  const int steps = sol.steps;
  if (steps < 4) throw ParameterError("hjb_residual needs at least 4 grid steps");
  if (k < 0 || k > steps) throw ParameterError("hjb_residual: grid index out of range");
  const double h = sol.T / steps;
  const int base = std::clamp(k, 2, steps - 2) - 2;
  const int o = k - base;

  const LQParams& p = model.params();
  Mat xr = x.transpose();
  Mat others = xr * sol.feedback[k].transpose();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd dp = Eigen::MatrixXd::Zero(n, n);
    double dr = 0.0;
    for (int j = 0; j < 5; ++j) {
      dp += kStencil[o][j] * sol.P[base + j][i];
      dr += kStencil[o][j] * sol.r[base + j](i);
    }
    dp /= 12.0 * h;
    dr /= 12.0 * h;
    const Eigen::MatrixXd& P = sol.P[k][i];
    Eigen::VectorXd grad = P * x;
    Mat z = Mat::Zero(1, n);
    z(0, i) = p.sigma * grad(i);
    Mat a = others;
    a(0, i) = model.minimizer(xr, z)(0, i);
    double drift_term = (model.drift(xr, a) * grad)(0, 0);
    double f = model.running_cost(xr, a)(0, i);
    double resid = 0.5 * x.dot(dp * x) + dr + drift_term + f + 0.5 * p.sigma * p.sigma * P.trace();
    worst = std::max(worst, std::abs(resid));
  }
  return worst;
}

double PortfolioBaseline::rho(int player, double t) const { return std::exp(kappa(player) * (T - t)); }

PortfolioBaseline portfolio_constant_ne(const PortfolioModel& model, KappaForm form) {
  const PortfolioParams& p = model.params();
  const int n = model.n();
  const Eigen::MatrixXd lap = model.interaction();
  // w(i, j): weight of player j in player i's neighbour average.
  Eigen::MatrixXd w = -lap.transpose();
  w.diagonal().setZero();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = p.nu(i) * p.nu(i) + p.sigma(i) * p.sigma(i);
    for (int j = 0; j < n; ++j) a(i, j) -= p.sigma(i) * p.theta(i) * w(i, j) * p.sigma(j);
    rhs(i) = p.delta(i) * p.mu(i);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-14)
    throw NumericalError("portfolio equilibrium system is singular; no constant equilibrium");
  PortfolioBaseline out;
  out.T = p.T;
  out.alpha = lu.solve(rhs);
  out.residual = (a * out.alpha - rhs).cwiseAbs().maxCoeff();
  out.kappa.resize(n);
  const Eigen::VectorXd& al = out.alpha;
  for (int i = 0; i < n; ++i) {
    double mu_hat = 0.0, sig_hat = 0.0, nu2_hat = 0.0;
    for (int j = 0; j < n; ++j) {
      mu_hat += w(i, j) * p.mu(j) * al(j);
      sig_hat += w(i, j) * p.sigma(j) * al(j);
      nu2_hat += (form == KappaForm::derived ? w(i, j) * w(i, j) : w(i, j)) * std::pow(p.nu(j) * al(j), 2);
    }
    const double d = p.delta(i), th = p.theta(i);
    const double sign = form == KappaForm::derived ? 1.0 : -1.0;
    out.kappa(i) = -(p.mu(i) * al(i) - th * mu_hat) / d +
                   (std::pow(p.nu(i) * al(i), 2) + sign * th * th * nu2_hat) / (2.0 * d * d) +
                   std::pow(p.sigma(i) * al(i) - th * sig_hat, 2) / (2.0 * d * d);
  }
  return out;
}

double portfolio_ansatz_value(const PortfolioModel& model, const PortfolioBaseline& b, int player) {
  const PortfolioParams& p = model.params();
  const int n = model.n();
  const Eigen::MatrixXd lap = model.interaction();
  double e = 1.0;
  for (int j = 0; j < n; ++j) {
    double coef = p.theta(player) * lap(player, j) + (j == player ? 1.0 - p.theta(player) : 0.0);
    double cj = coef / p.delta(player) * model.delta0();
    e *= std::abs(cj) < 1e-12 ? 1.0 + cj * cj / 6.0 : std::sinh(cj) / cj;
  }
  return b.rho(player, 0.0) * e;
}

void write_riccati_csv(std::ostream& os, const RiccatiSolution& sol, int stride) {
  if (stride < 1) throw ParameterError("stride must be >= 1");
  const int n = sol.n();
  os << "t,player";
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) os << ",P_" << r + 1 << '_' << c + 1;
  os << '\n';
  for (int k = 0; k <= sol.steps; k += stride)
    for (int i = 0; i < n; ++i) {
      os << format_double(sol.time(k)) << ',' << i + 1;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) os << ',' << format_double(sol.P[k][i](r, c));
      os << '\n';
    }
}

void write_portfolio_csv(std::ostream& os, const PortfolioBaseline& b) {
  const auto n = b.alpha.size();
  for (Eigen::Index i = 0; i < n; ++i) os << (i ? "," : "") << "alpha_" << i + 1;
  for (Eigen::Index i = 0; i < n; ++i) os << ",kappa_" << i + 1;
  os << '\n';
  for (Eigen::Index i = 0; i < n; ++i) os << (i ? "," : "") << format_double(b.alpha(i));
  for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(b.kappa(i));
  os << '\n';
}

}  // namespace ggl

#include "ggl/uat.hpp"

#include <algorithm>
#include <cmath>

#include "ggl/errors.hpp"

namespace ggl {

BestResponseNet::BestResponseNet(int n_, int channels_, int d_in_, int d_out_)
    : n(n_), channels(channels_), d_in(d_in_), d_out(d_out_) {
  beta.assign(n, std::vector<Eigen::VectorXd>(channels, Eigen::VectorXd::Zero(d_out)));
  eta = beta;
  gamma_x.assign(n, std::vector<Eigen::MatrixXd>(channels, Eigen::MatrixXd::Zero(d_out, n * d_in)));
  gamma_a.assign(n, std::vector<Eigen::MatrixXd>(channels, Eigen::MatrixXd::Zero(d_out, n * d_out)));
}

Eigen::VectorXd BestResponseNet::apply(const Eigen::VectorXd& x, const Eigen::VectorXd& a) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n * d_out);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < channels; ++r) {
      Eigen::VectorXd pre = gamma_x[i][r] * x + gamma_a[i][r] * a + eta[i][r];
      out.segment(i * d_out, d_out) += beta[i][r].cwiseProduct(pre.cwiseMax(0.0));
    }
  return out;
}

void BestResponseNet::validate(const Graph& g) const {
  if (g.n() != n) throw ParameterError("best-response net size does not match the graph");
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < channels; ++r)
      for (int j = 0; j < n; ++j) {
        bool xs = j == i || g.adjacent(i, j);
        bool as = g.adjacent(i, j);
        if (!xs && gamma_x[i][r].middleCols(j * d_in, d_in).cwiseAbs().maxCoeff() != 0.0)
          throw ParameterError("state weight of player " + std::to_string(i) + " reads non-neighbour " +
                               std::to_string(j));
        if (!as && gamma_a[i][r].middleCols(j * d_out, d_out).cwiseAbs().maxCoeff() != 0.0)
          throw ParameterError("action weight of player " + std::to_string(i) + " reads non-neighbour " +
                               std::to_string(j));
      }
}

Eigen::VectorXd fixed_point_iterate(const BestResponseFn& map, const Eigen::VectorXd& x, int k, int action_dim) {
  if (k < 0) throw ParameterError("fixed_point_iterate: K must be >= 0");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(action_dim);
  for (int s = 0; s < k; ++s) a = map(x, a);
  return a;
}

Eigen::VectorXd fixed_point_iterate(const ContractionGame& game, const Eigen::VectorXd& x, int k) {
  return fixed_point_iterate(game.best_response, x, k, game.graph.n() * game.d_out);
}

Eigen::VectorXd equilibrium(const ContractionGame& game, const Eigen::VectorXd& x, double tol, int max_iter) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(game.graph.n() * game.d_out);
  for (int s = 0; s < max_iter; ++s) {
    Eigen::VectorXd next = game.best_response(x, a);
    double change = (next - a).cwiseAbs().maxCoeff();
    a = std::move(next);
    if (change <= tol) return a;
  }
  throw NumericalError("equilibrium: fixed-point iteration did not converge");
}

std::unique_ptr<NTM> construct_ntm(const Graph& g, const BestResponseNet& br, int depth, int player,
                                   Activation activation) {
  if (br.channels < 2) throw ParameterError("construct_ntm needs at least 2 channels");
  if (activation != Activation::relu) throw ParameterError("construct_ntm requires ReLU activation");
  br.validate(g);
  const int n = g.n(), m = br.channels, di = br.d_in, dout = br.d_out, d = di + dout;
  NTMSpec spec;
  spec.player = player;
  spec.depth = depth;
  spec.channels = m;
  spec.hidden_dim = d;
  spec.d_in = di;
  spec.d_out = dout;
  spec.activation = activation;
  Rng rng(0);
  auto net = std::make_unique<NTM>(g, spec, rng);
  for (Parameter* p : net->parameters()) p->value.setZero();

  Mat& w_in = net->param("W_in").value;
  for (int p = 0; p < n; ++p)
    for (int c = 0; c < di; ++c) w_in(p * di + c, p * d + c) = 1.0;

  for (int k = 1; k < depth; ++k) {
    std::string ks = std::to_string(k);
    Mat& w = net->param("W" + ks).value;
    Mat& h = net->param("h" + ks).value;
    Mat& gg = net->param("G" + ks).value;
    for (int p = 0; p < n; ++p)
      for (int r = 0; r < m; ++r) {
        const double cr = r == 0 ? 1.0 : (r == 1 ? -1.0 : 0.0);
        const int col0 = net->channel_col(p, r, 0);
        // State rows of the pre-activation: c_r * own state.
        for (int c = 0; c < di; ++c) w(p * d + c, col0 + c) = cr;
        // Action rows: gamma_x on states of {p} and neighbours, gamma_a on neighbour actions.
        for (int q = 0; q < n; ++q) {
          if (q != p && !g.adjacent(p, q)) continue;
          for (int o = 0; o < dout; ++o) {
            for (int c = 0; c < di; ++c) w(q * d + c, col0 + di + o) = br.gamma_x[p][r](o, q * di + c);
            if (q != p)
              for (int c = 0; c < dout; ++c) w(q * d + di + c, col0 + di + o) = br.gamma_a[p][r](o, q * dout + c);
          }
        }
        for (int o = 0; o < dout; ++o) h(0, col0 + di + o) = br.eta[p][r](o);
        for (int c = 0; c < di; ++c) gg(col0 + c, p * d + c) = cr;
        for (int o = 0; o < dout; ++o) gg(col0 + di + o, p * d + di + o) = br.beta[p][r](o);
      }
  }
  Mat& w_out = net->param("W_out").value;
  for (int o = 0; o < dout; ++o) w_out(player * d + di + o, o) = 1.0;
  for (Parameter* p : net->parameters()) {
    Mat outside = p->value.array() * (1.0 - p->mask.array());
    if (outside.cwiseAbs().maxCoeff() != 0.0)
      throw ParameterError("construct_ntm: weight placed on a frozen entry of '" + p->name + "'");
  }
  return net;
}

ContractionFamily linear_contraction_family(const Graph& g, double rho, uint64_t seed, int channels) {
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0,1)");
  if (channels < 2) throw ParameterError("linear family needs at least 2 channels");
  const int n = g.n();
  Rng rng = Rng(seed).substream("linear_contraction", {static_cast<uint64_t>(n)});
  Eigen::VectorXd kappa(n), mu(n);
  for (int i = 0; i < n; ++i) {
    kappa(i) = rng.uniform(-1.0, 1.0);
    mu(i) = rng.uniform(-0.5, 0.5);
  }
  ContractionFamily fam{ContractionGame(g), BestResponseNet(n, channels, 1, 1), 0.0};
  fam.game.rho = rho;
  double amax = (kappa.cwiseAbs().maxCoeff() + mu.cwiseAbs().maxCoeff()) / (1.0 - rho);
  fam.game.a_lo = -amax;
  fam.game.a_hi = amax;
  fam.game.best_response = [g, kappa, mu, rho](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    Eigen::VectorXd out(g.n());
    for (int i = 0; i < g.n(); ++i) {
      double s = 0.0;
      for (int j : g.neighbors(i)) s += a(j);
      out(i) = kappa(i) * x(i) + mu(i) + rho * s / g.degree(i);
    }
    return out;
  };
  // l = relu(l) - relu(-l)
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < 2; ++r) {
      const double sgn = r == 0 ? 1.0 : -1.0;
      fam.surrogate.beta[i][r](0) = sgn;
      fam.surrogate.eta[i][r](0) = sgn * mu(i);
      fam.surrogate.gamma_x[i][r](0, i) = sgn * kappa(i);
      for (int j : g.neighbors(i)) fam.surrogate.gamma_a[i][r](0, j) = sgn * rho / g.degree(i);
    }
  return fam;
}

ContractionFamily tanh_contraction_family(const Graph& g, double rho, double kappa, int knots) {
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0,1)");
  if (knots < 1) throw ParameterError("tanh family needs at least one interval");
  const int n = g.n();
  // Domain of the scalar argument s = kappa x_i + rho * mean(a) for x, a in [-1, 1].
  const double s_lo = -(std::abs(kappa) + rho), s_hi = std::abs(kappa) + rho;
  const int channels = std::max(2, knots + 1);
  ContractionFamily fam{ContractionGame(g), BestResponseNet(n, channels, 1, 1), 0.0};
  fam.game.rho = rho;
  fam.game.best_response = [g, kappa, rho](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    Eigen::VectorXd out(g.n());
    for (int i = 0; i < g.n(); ++i) {
      double s = 0.0;
      for (int j : g.neighbors(i)) s += a(j);
      out(i) = std::tanh(kappa * x(i) + rho * s / g.degree(i));
    }
    return out;
  };

  // Interpolant: tanh(s_lo) * relu(1) + sum_k slope jump_k * relu(s - t_k),
  // with the constant carried by a channel whose pre-activation is 1.
  std::vector<double> t(knots + 1), slope(knots);
  for (int k = 0; k <= knots; ++k) t[k] = s_lo + (s_hi - s_lo) * k / knots;
  for (int k = 0; k < knots; ++k) slope[k] = (std::tanh(t[k + 1]) - std::tanh(t[k])) / (t[k + 1] - t[k]);
  for (int i = 0; i < n; ++i) {
    auto& br = fam.surrogate;
    br.beta[i][0](0) = std::tanh(s_lo);
    br.eta[i][0](0) = 1.0;
    for (int k = 0; k < knots; ++k) {
      const int r = k + 1;
      br.beta[i][r](0) = k == 0 ? slope[0] : slope[k] - slope[k - 1];
      br.gamma_x[i][r](0, i) = kappa;
      for (int j : g.neighbors(i)) br.gamma_a[i][r](0, j) = rho / g.degree(i);
      br.eta[i][r](0) = -t[k];
    }
  }
  double delta = 0.0;
  const int grid = 200000;
  for (int k = 0; k <= grid; ++k) {
    double s = s_lo + (s_hi - s_lo) * k / grid;
    double pl = std::tanh(s_lo);
    for (int j = 0; j < knots; ++j)
      pl += (j == 0 ? slope[0] : slope[j] - slope[j - 1]) * std::max(0.0, s - t[j]);
    delta = std::max(delta, std::abs(pl - std::tanh(s)));
  }
  fam.delta = delta;
  return fam;
}

namespace {

Eigen::VectorXd sample_box(int n, double lo, double hi, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v(k) = rng.uniform(lo, hi);
  return v;
}

}  // namespace

double certify_rho(const ContractionGame& game, int samples, Rng& rng) {
  const int nx = game.graph.n() * game.d_in, na = game.graph.n() * game.d_out;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x = sample_box(nx, game.x_lo, game.x_hi, rng);
    Eigen::VectorXd a = sample_box(na, game.a_lo, game.a_hi, rng);
    Eigen::VectorXd b = sample_box(na, game.a_lo, game.a_hi, rng);
    double den = (a - b).cwiseAbs().maxCoeff();
    if (den == 0.0) continue;
    double num = (game.best_response(x, a) - game.best_response(x, b)).cwiseAbs().maxCoeff();
    worst = std::max(worst, num / den);
  }
  return worst;
}

std::vector<UatRow> uat_check(const ContractionFamily& fam, const std::vector<int>& depths, int samples, Rng& rng) {
  const ContractionGame& game = fam.game;
  const int n = game.graph.n(), di = game.d_in, dout = game.d_out;
  Mat xs(samples, n * di);
  for (int s = 0; s < samples; ++s) xs.row(s) = sample_box(n * di, game.x_lo, game.x_hi, rng).transpose();
  std::vector<Eigen::VectorXd> eq(samples);
  for (int s = 0; s < samples; ++s) eq[s] = equilibrium(game, xs.row(s).transpose());

  BestResponseFn surrogate = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    return fam.surrogate.apply(x, a);
  };
  std::vector<UatRow> rows;
  for (int depth : depths) {
    UatRow row;
    row.depth = depth;
    row.pass = true;
    std::vector<Mat> outputs;
    for (int i = 0; i < n; ++i) outputs.push_back(construct_ntm(game.graph, fam.surrogate, depth, i)->evaluate(xs));
    for (int s = 0; s < samples; ++s) {
      Eigen::VectorXd x = xs.row(s).transpose();
      Eigen::VectorXd iter = fixed_point_iterate(surrogate, x, depth - 1, n * dout);
      double bound = fam.delta / (1.0 - game.rho) + std::pow(game.rho, depth - 1) * eq[s].cwiseAbs().maxCoeff();
      double err = 0.0;
      for (int i = 0; i < n; ++i)
        for (int o = 0; o < dout; ++o) {
          double out = outputs[i](s, o);
          err = std::max(err, std::abs(out - eq[s](i * dout + o)));
          row.iterate_mismatch = std::max(row.iterate_mismatch, std::abs(out - iter(i * dout + o)));
        }
      row.sup_error = std::max(row.sup_error, err);
      row.bound = std::max(row.bound, bound);
      // The bound is attained exactly for some profiles on bipartite graphs;
      // the slack absorbs rounding in the equilibrium solve and the iterates.
      if (err > bound + 1e-12) row.pass = false;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ggl

#include "ggl/nets.hpp"

#include <algorithm>
#include <cmath>

#include "ggl/errors.hpp"
#include "ggl/linalg.hpp"
#include "ggl/optim.hpp"

namespace ggl {

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ParameterError("unknown activation '" + s + "'");
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

ArchKind parse_arch(const std::string& s) {
  if (s == "fnn") return ArchKind::fnn;
  if (s == "ntm") return ArchKind::ntm;
  if (s == "cheb") return ArchKind::cheb;
  throw ParameterError("unknown architecture '" + s + "'");
}

std::string to_string(ArchKind a) {
  switch (a) {
    case ArchKind::fnn: return "fnn";
    case ArchKind::ntm: return "ntm";
    case ArchKind::cheb: return "cheb";
  }
  return "?";
}

Mat Network::evaluate(const Mat& x) {
  Tape t;
  return forward(t, t.constant(x), false).value();
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> Network::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

Parameter& Network::param(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return *p;
  throw ParameterError("network has no parameter '" + name + "'");
}

ParamCount Network::count_params() const {
  ParamCount c;
  for (const auto& p : params_) {
    c.trainable += p->trainable_count();
    c.frozen += p->frozen_count();
  }
  return c;
}

Parameter& Network::add_param(std::string name, Mat value, Mat mask) {
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(value), std::move(mask)));
  return *params_.back();
}

namespace {

void check_input(const char* who, const Var& x, int dim) {
  if (x.cols() != dim)
    throw ShapeError(std::string(who) + ": expected input width " + std::to_string(dim) + ", got " +
                     shape_str(x.value()));
}

Mat ones(Eigen::Index r, Eigen::Index c) { return Mat::Ones(r, c); }

}  // namespace

FNN::FNN(const FNNSpec& spec, Rng& rng) : spec_(spec) {
  const auto& s = spec_.layer_sizes;
  if (s.size() < 3) throw ParameterError("FNN needs at least 3 layer sizes (input, hidden, output)");
  if (std::any_of(s.begin(), s.end(), [](int v) { return v < 1; }))
    throw ParameterError("FNN layer sizes must be positive");
  activation_ = spec_.activation;
  const std::size_t hidden = s.size() - 2;
  for (std::size_t k = 0; k < hidden; ++k) {
    add_param("W" + std::to_string(k), xavier_init(s[k], s[k + 1], s[k], s[k + 1], rng), ones(s[k], s[k + 1]));
    add_param("b" + std::to_string(k), Mat::Zero(1, s[k + 1]), ones(1, s[k + 1]));
  }
  int h = s[s.size() - 2], o = s.back();
  add_param("w_out", xavier_init(h, o, h, o, rng), ones(h, o));
  add_param("b_out", Mat::Zero(1, o), ones(1, o));
}

Var FNN::forward(Tape& t, Var x, bool track) {
  check_input("fnn_forward", x, input_dim());
  const std::size_t hidden = spec_.layer_sizes.size() - 2;
  Var z = x;
  for (std::size_t k = 0; k < hidden; ++k) {
    Var u = act(add(matmul(z, use(t, *params_[2 * k], track)), use(t, *params_[2 * k + 1], track)));
    z = (spec_.skip && spec_.layer_sizes[k] == spec_.layer_sizes[k + 1]) ? add(z, u) : u;
  }
  return add(matmul(z, use(t, *params_[2 * hidden], track)), use(t, *params_[2 * hidden + 1], track));
}

NTM::NTM(const Graph& g, const NTMSpec& spec, Rng& rng) : n_(g.n()), spec_(spec) {
  const int n = n_, m = spec_.channels, d = spec_.hidden_dim;
  if (spec_.depth < 2) throw ParameterError("NTM depth K must be >= 2");
  if (m < 1 || d < 1 || spec_.d_in < 1 || spec_.d_out < 1)
    throw ParameterError("NTM channels and dimensions must be positive");
  if (!spec_.vector_output && (spec_.player < 0 || spec_.player >= n))
    throw ParameterError("NTM player index " + std::to_string(spec_.player) + " out of range");
  if (spec_.vector_output && d != 1) throw ParameterError("vector-output NTM requires hidden_dim = 1");
  if (!multi_dim() && spec_.d_out != 1) throw ParameterError("1D NTM requires d_out = 1");
  activation_ = spec_.activation;
  Eigen::MatrixXd lmask = laplacian_mask(g);

  if (multi_dim()) {
    const int di = spec_.d_in;
    Mat mask = Mat::Zero(n * di, n * d);
    for (int p = 0; p < n; ++p) mask.block(p * di, p * d, di, d).setOnes();
    Mat w = xavier_init(n * di, n * d, n * di, n * d, rng);
    add_param("W_in", w, mask);
    add_param("b_in", Mat::Zero(1, n * d), ones(1, n * d));
  }

  const int nd = n * d, mnd = n * m * d;
  for (int k = 1; k < spec_.depth; ++k) {
    Mat wmask = Mat::Zero(nd, mnd);
    Mat gmask = Mat::Zero(mnd, nd);
    for (int p = 0; p < n; ++p)
      for (int r = 0; r < m; ++r) {
        for (int q = 0; q < n; ++q)
          if (lmask(p, q) != 0.0) wmask.block(q * d, channel_col(p, r, 0), d, d).setOnes();
        for (int c = 0; c < d; ++c) gmask(channel_col(p, r, c), p * d + c) = 1.0;
      }
    std::string ks = std::to_string(k);
    add_param("W" + ks, xavier_init(nd, mnd, nd, mnd, rng), wmask);
    add_param("h" + ks, Mat::Zero(1, mnd), ones(1, mnd));
    add_param("G" + ks, xavier_init(mnd, nd, mnd, nd, rng), gmask);
    add_param("b" + ks, Mat::Zero(1, nd), ones(1, nd));
  }

  if (spec_.vector_output) {
    Mat mask(nd, n);
    for (int q = 0; q < n; ++q)
      for (int j = 0; j < n; ++j) mask(q, j) = lmask(q, j) != 0.0 ? 1.0 : 0.0;
    add_param("W_out", xavier_init(nd, n, nd, n, rng), mask);
    add_param("b_out", Mat::Zero(1, n), ones(1, n));
  } else {
    const int i = spec_.player, dout = spec_.d_out;
    Mat mask = Mat::Zero(nd, dout);
    for (int q = 0; q < n; ++q)
      if (lmask(i, q) != 0.0) mask.middleRows(q * d, d).setOnes();
    add_param("W_out", xavier_init(nd, dout, nd, dout, rng), mask);
    add_param("b_out", Mat::Zero(1, dout), ones(1, dout));
  }
}

Var NTM::forward(Tape& t, Var x, bool track) {
  check_input("ntm_forward", x, input_dim());
  std::size_t idx = 0;
  Var z = x;
  if (multi_dim()) {
    z = add(matmul(z, use(t, *params_[0], track)), use(t, *params_[1], track));
    idx = 2;
  }
  for (int k = 1; k < spec_.depth; ++k, idx += 4) {
    Var u = add(matmul(z, use(t, *params_[idx], track)), use(t, *params_[idx + 1], track));
    Var next = add(matmul(act(u), use(t, *params_[idx + 2], track)), use(t, *params_[idx + 3], track));
    z = spec_.skip ? add(z, next) : next;
  }
  return add(matmul(z, use(t, *params_[idx], track)), use(t, *params_[idx + 1], track));
}

Mat scaled_laplacian(const Graph& g, double* lambda_max) {
  Eigen::MatrixXd lap = laplacian(g);
  double lmax = largest_eigenvalue(lap);
  if (!(lmax > 0.0)) throw NumericalError("scaled_laplacian: largest eigenvalue is not positive");
  if (lambda_max) *lambda_max = lmax;
  Eigen::MatrixXd out = (2.0 / lmax) * lap - Eigen::MatrixXd::Identity(lap.rows(), lap.cols());
  return out;
}

ChebGCN::ChebGCN(const Graph& g, const ChebSpec& spec, Rng& rng) : n_(g.n()), spec_(spec) {
  const auto& f = spec_.features;
  if (f.size() < 2 || f.front() != 1 || f.back() != 1)
    throw ParameterError("Chebyshev GCN feature dims must start and end with 1");
  if (std::any_of(f.begin(), f.end(), [](int v) { return v < 1; }))
    throw ParameterError("Chebyshev GCN feature dims must be positive");
  activation_ = spec_.activation;
  scaled_lap_ = ggl::scaled_laplacian(g, &lambda_max_);
  for (std::size_t k = 0; k + 1 < f.size(); ++k) {
    std::string ks = std::to_string(k + 1);
    add_param("W" + ks + "_1", xavier_init(f[k], f[k + 1], f[k], f[k + 1], rng), ones(f[k], f[k + 1]));
    add_param("W" + ks + "_2", xavier_init(f[k], f[k + 1], f[k], f[k + 1], rng), ones(f[k], f[k + 1]));
    add_param("b" + ks, Mat::Zero(1, f[k + 1]), ones(1, f[k + 1]));
  }
  add_param("w_out", xavier_init(n_, 1, n_, 1, rng), ones(n_, 1));
  add_param("b_out", Mat::Zero(1, 1), ones(1, 1));
}

Var ChebGCN::forward(Tape& t, Var x, bool track) {
  check_input("cheb_forward", x, n_);
  const Eigen::Index batch = x.rows();
  Var z = reshape(x, batch * n_, 1);
  const std::size_t layers = spec_.features.size() - 1;
  for (std::size_t k = 0; k < layers; ++k) {
    Var a = matmul(z, use(t, *params_[3 * k], track));
    Var b = matmul(block_apply(z, scaled_lap_), use(t, *params_[3 * k + 1], track));
    z = act(add(add(a, b), use(t, *params_[3 * k + 2], track)));
  }
  Var zz = reshape(z, batch, n_);
  return add(matmul(zz, use(t, *params_[3 * layers], track)), use(t, *params_[3 * layers + 1], track));
}

std::unique_ptr<Network> make_network(const NetworkSpec& spec, const Graph& g, Rng& rng) {
  switch (spec.kind) {
    case ArchKind::fnn: return std::make_unique<FNN>(spec.fnn, rng);
    case ArchKind::ntm: return std::make_unique<NTM>(g, spec.ntm, rng);
    case ArchKind::cheb: return std::make_unique<ChebGCN>(g, spec.cheb, rng);
  }
  throw ParameterError("unknown architecture");
}

ParamCount count_params(const NetworkSpec& spec, const Graph& g) {
  Rng rng(0);
  return make_network(spec, g, rng)->count_params();
}

long fnn_width_n_count(int n, int depth) {
  return static_cast<long>(depth - 1) * (static_cast<long>(n) * n + n) + n + 1;
}

long ntm_param_bound(int n, int edges, int depth, int channels) {
  return static_cast<long>(channels) * (depth - 1) * (4L * n + 2L * edges) + n + 1;
}

double network_gradient_check(Network& net, const Mat& x, Rng& rng, double h) {
  Mat weight(x.rows(), net.output_dim());
  for (Eigen::Index k = 0; k < weight.size(); ++k) weight.data()[k] = rng.uniform(-1.0, 1.0);
  auto loss_value = [&](const Mat& xin) {
    Tape t;
    return sum(hadamard(net.forward(t, t.constant(xin), false), t.constant(weight))).scalar();
  };

  auto params = net.parameters();
  zero_grads(params);
  Tape t;
  Var xv = t.input(x);
  t.backward(sum(hadamard(net.forward(t, xv, true), t.constant(weight))));
  Mat gx = t.grad(xv);

  double max_diff = 0.0, max_ref = 1e-8;
  auto compare = [&](double ad, double fd) {
    max_diff = std::max(max_diff, std::abs(ad - fd));
    max_ref = std::max({max_ref, std::abs(ad), std::abs(fd)});
  };
  Mat xp = x;
  for (Eigen::Index k = 0; k < xp.size(); ++k) {
    double orig = xp.data()[k];
    xp.data()[k] = orig + h;
    double fp = loss_value(xp);
    xp.data()[k] = orig - h;
    double fm = loss_value(xp);
    xp.data()[k] = orig;
    compare(gx.data()[k], (fp - fm) / (2.0 * h));
  }
  for (Parameter* p : params) {
    for (Eigen::Index k = 0; k < p->value.size(); ++k) {
      if (p->mask.data()[k] == 0.0) continue;
      double orig = p->value.data()[k];
      p->value.data()[k] = orig + h;
      double fp = loss_value(x);
      p->value.data()[k] = orig - h;
      double fm = loss_value(x);
      p->value.data()[k] = orig;
      compare(p->grad.data()[k], (fp - fm) / (2.0 * h));
    }
  }
  zero_grads(params);
  return max_diff / max_ref;
}

}  // namespace ggl

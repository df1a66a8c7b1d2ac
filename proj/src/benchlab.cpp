#include "ggl/benchlab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "ggl/baselines.hpp"
#include "ggl/errors.hpp"
#include "ggl/format.hpp"
#include "ggl/linalg.hpp"
#include "ggl/optim.hpp"

namespace ggl {

TargetId parse_target(const std::string& s) {
  if (s == "lq" || s == "f1") return TargetId::lq;
  if (s == "lqmh" || s == "f2") return TargetId::lqmh;
  if (s == "nl" || s == "f3") return TargetId::nl;
  if (s == "nlm" || s == "f4") return TargetId::nlm;
  throw ParameterError("unknown target '" + s + "'");
}

std::string to_string(TargetId id) {
  switch (id) {
    case TargetId::lq: return "lq";
    case TargetId::lqmh: return "lqmh";
    case TargetId::nl: return "nl";
    case TargetId::nlm: return "nlm";
  }
  return "?";
}

int case_index(TargetId id) { return static_cast<int>(id) + 1; }

double TargetFunction::at(const Eigen::VectorXd& x) const {
  Mat row = x.transpose();
  return eval(row)(0, 0);
}

LQParams benchmark_lq_params() {
  LQParams p;
  p.a = 0.1;
  p.sigma = 0.5;
  p.q = 0.0;
  p.eps = 1.0;
  p.c = 1.0;
  p.T = 1.0;
  return p;
}

namespace {

TargetFunction linear_target(TargetId id, int n, int ell, const Eigen::RowVectorXd& w) {
  TargetFunction f;
  f.id = id;
  f.n = n;
  f.ell = ell;
  Mat col = w.transpose();
  f.eval = [col](const Mat& x) -> Mat { return x * col; };
  return f;
}

}  // namespace

TargetFunction make_target(TargetId id, const Graph& g, const LQParams& p, int ell) {
  const int n = g.n();
  const Eigen::MatrixXd lap = laplacian(g);
  const Eigen::MatrixXd id_n = Eigen::MatrixXd::Identity(n, n);
  switch (id) {
    case TargetId::lq: {
      LQModel model(g, p);
      RiccatiSolution sol = solve_lq_riccati(model, 1000);
      return linear_target(id, n, ell, sol.feedback[0].row(0));
    }
    case TargetId::lqmh: {
      LQModel model(g, p, multi_hop_operator(lap, ell));
      RiccatiSolution sol = solve_lq_riccati(model, 1000);
      return linear_target(id, n, ell, sol.feedback[0].row(0));
    }
    case TargetId::nl: {
      const double det = (0.5 * id_n + lap).determinant();
      const double inv_norm = spectral_norm((id_n + lap).inverse());
      Eigen::MatrixXd coef = det * lap + inv_norm * lap * lap;
      Mat col = coef.row(0).transpose();
      TargetFunction f;
      f.id = id;
      f.n = n;
      f.ell = ell;
      f.eval = [col](const Mat& x) -> Mat { return x.array().square().matrix() * col; };
      return f;
    }
    case TargetId::nlm: {
      const double det = (0.5 * id_n + lap).determinant();
      // Row i-1 of the normalized mixing matrix of term i.
      Mat rows(n, n);
      for (int i = 1; i <= n; ++i) {
        Eigen::MatrixXd mix = det * matrix_power(lap, i) + (id_n + i * lap).inverse().trace() * matrix_power(lap, n + 1 - i);
        mix /= spectral_norm(mix);
        rows.row(i - 1) = mix.row(i - 1);
      }
      TargetFunction f;
      f.id = id;
      f.n = n;
      f.ell = ell;
      f.eval = [rows, n](const Mat& x) -> Mat {
        Mat s = (2.0 * M_PI * x.array()).sin().matrix();
        Mat out = Mat::Zero(x.rows(), 1);
        for (int i = 1; i <= n; ++i) {
          Mat v = (s.array() * (1.0 + x.array()).pow(static_cast<double>(i) / n)).matrix();
          out += v * rows.row(i - 1).transpose();
        }
        return 10.0 * out;
      };
      return f;
    }
  }
  throw ParameterError("unknown target");
}

Mat lhs_sample(int n, int dim, Rng& rng) {
  if (n < 1 || dim < 1) throw ParameterError("lhs_sample needs n >= 1 and dim >= 1");
  Mat out(n, dim);
  for (int d = 0; d < dim; ++d) {
    std::vector<int> strata = rng.permutation(n);
    for (int k = 0; k < n; ++k) out(k, d) = (strata[k] + rng.uniform()) / n;
  }
  return out;
}

double relative_rmse(const Mat& pred, const Mat& truth, double delta) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw ShapeError("relative_rmse: shapes " + shape_str(pred) + " and " + shape_str(truth) + " differ");
  return (pred - truth).squaredNorm() / (truth.squaredNorm() + delta);
}

SupervisedHyper SupervisedHyper::for_case(ArchKind arch, TargetId id) {
  static const double kLr[4] = {0.001, 0.001, 0.005, 0.01};
  static const double kChebLr[4] = {0.002, 0.002, 0.01, 0.02};
  const int j = case_index(id);
  SupervisedHyper h;
  h.epochs = 2000 * j;
  h.lr = arch == ArchKind::cheb ? kChebLr[j - 1] : kLr[j - 1];
  h.scheduled = arch == ArchKind::cheb;
  return h;
}

NetworkSpec supervised_spec(ArchKind arch, int n, int player, int ntm_depth) {
  NetworkSpec s;
  s.kind = arch;
  s.fnn.layer_sizes = {n, 32, 32, 1};
  s.fnn.activation = Activation::tanh;
  s.fnn.skip = false;
  s.ntm.player = player;
  s.ntm.depth = ntm_depth;
  s.ntm.channels = 3;
  s.ntm.activation = Activation::relu;
  s.ntm.skip = false;
  s.cheb.features = {1, 64, 1};
  s.cheb.activation = Activation::relu;
  return s;
}

ScoreResult train_and_score(const NetworkSpec& spec, const Graph& g, const TargetFunction& target,
                            const SupervisedHyper& hyper, const Rng& rng) {
  if (hyper.epochs < 0 || hyper.batch < 1 || hyper.n_test < 1) throw ParameterError("invalid supervised hyperparameters");
  if (target.n != g.n()) throw ShapeError("target dimension does not match the graph");
  Rng init = rng.substream("init");
  std::unique_ptr<Network> net = make_network(spec, g, init);
  std::vector<Parameter*> params = net->parameters();
  ScoreResult res;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Rng batch_rng = rng.substream("batch", {static_cast<uint64_t>(epoch)});
    Mat x = lhs_sample(hyper.batch, g.n(), batch_rng);
    Mat y = target(x);
    zero_grads(params);
    Tape t;
    Var loss = mean(square(sub(net->forward(t, t.constant(x)), t.constant(y))));
    res.final_loss = loss.scalar();
    res.epochs = epoch + 1;
    if (!std::isfinite(res.final_loss)) {
      res.diverged = true;
      break;
    }
    t.backward(loss);
    const double lr = hyper.scheduled ? lr_schedule(hyper.lr, epoch, hyper.gamma, hyper.tau) : hyper.lr;
    try {
      adam_step(params, lr);
    } catch (const NumericalError&) {
      res.diverged = true;
      break;
    }
  }
  if (res.diverged) {
    res.rmse = std::numeric_limits<double>::infinity();
    return res;
  }
  Rng test_rng = rng.substream("test");
  Mat xt = lhs_sample(hyper.n_test, g.n(), test_rng);
  Mat pred(xt.rows(), 1);
  const Eigen::Index chunk = 5000;
  for (Eigen::Index r0 = 0; r0 < xt.rows(); r0 += chunk) {
    Eigen::Index m = std::min(chunk, xt.rows() - r0);
    pred.middleRows(r0, m) = net->evaluate(xt.middleRows(r0, m));
  }
  res.rmse = relative_rmse(pred, target(xt), hyper.delta);
  if (!std::isfinite(res.rmse)) {
    res.diverged = true;
    res.rmse = std::numeric_limits<double>::infinity();
  }
  return res;
}

Summary summarize(std::vector<double> v) {
  if (v.empty()) throw ParameterError("summarize: no values");
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    double pos = q * (v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double w = pos - lo;
    if (w == 0.0) return v[lo];
    return (1 - w) * v[lo] + w * v[hi];
  };
  Summary s;
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / v.size();
  return s;
}

std::string cell_label(const BenchmarkCell& c) {
  std::string s = to_string(c.arch) + "/" + to_string(c.graph) + "/" + to_string(c.target);
  if (c.arch == ArchKind::ntm) s += "/player" + std::to_string(c.player + 1) + "/K" + std::to_string(c.ntm_depth);
  return s;
}

std::vector<double> BenchmarkReport::rmse(int cell) const {
  if (cell < 0 || cell >= static_cast<int>(cells.size())) throw ParameterError("cell index out of range");
  std::vector<double> out;
  for (int r = 0; r < n_runs; ++r) out.push_back(rows.at(static_cast<std::size_t>(cell) * n_runs + r).score.rmse);
  return out;
}

Summary BenchmarkReport::summary(int cell) const { return summarize(rmse(cell)); }

void BenchmarkReport::write_csv(std::ostream& os, bool with_wall_ms) const {
  os << "arch,graph,target,player,depth,run,seed,final_rmse,epochs,diverged";
  if (with_wall_ms) os << ",wall_ms";
  os << '\n';
  for (const BenchmarkRow& r : rows) {
    os << to_string(r.cell.arch) << ',' << to_string(r.cell.graph) << ',' << to_string(r.cell.target) << ','
       << r.cell.player + 1 << ',' << r.cell.ntm_depth << ',' << r.run << ',' << r.seed << ','
       << format_double(r.score.rmse) << ',' << r.score.epochs << ',' << (r.score.diverged ? 1 : 0);
    if (with_wall_ms) os << ',' << format_double(std::round(r.wall_ms * 1000.0) / 1000.0);
    os << '\n';
  }
}

void BenchmarkReport::write_summary(std::ostream& os) const {
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    Summary s = summary(c);
    os << cell_label(cells[c]) << ": min " << format_double(s.min) << ", q1 " << format_double(s.q1) << ", median "
       << format_double(s.median) << ", mean " << format_double(s.mean) << ", q3 " << format_double(s.q3) << ", max "
       << format_double(s.max) << '\n';
  }
}

BenchmarkReport run_benchmark(const std::vector<BenchmarkCell>& cells, const BenchmarkOptions& opt) {
  if (opt.n_runs < 1) throw ParameterError("n_runs must be >= 1");
  if (opt.threads < 1) throw ParameterError("threads must be >= 1");
  if (!(opt.epoch_scale > 0.0)) throw ParameterError("epoch_scale must be positive");
  BenchmarkReport rep;
  rep.cells = cells;
  rep.n_runs = opt.n_runs;
  const int n_jobs = static_cast<int>(cells.size()) * opt.n_runs;
  rep.rows.resize(n_jobs);

  // Targets are built once per cell before the workers start.
  std::vector<Graph> graphs;
  std::vector<TargetFunction> targets;
  for (const BenchmarkCell& c : cells) {
    graphs.push_back(make_graph(c.graph, opt.n, opt.graph_seed));
    targets.push_back(make_target(c.target, graphs.back()));
  }

  const Rng root(opt.seed);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (int job = next++; job < n_jobs && !failed; job = next++) {
      const int ci = job / opt.n_runs, run = job % opt.n_runs;
      const BenchmarkCell& c = cells[ci];
      try {
        Rng rng = root.substream("benchmark", {static_cast<uint64_t>(ci), static_cast<uint64_t>(run)});
        SupervisedHyper hyper = SupervisedHyper::for_case(c.arch, c.target);
        hyper.epochs = std::max(1, static_cast<int>(std::lround(hyper.epochs * opt.epoch_scale)));
        hyper.n_test = opt.n_test;
        auto t0 = std::chrono::steady_clock::now();
        ScoreResult s = train_and_score(supervised_spec(c.arch, opt.n, c.player, c.ntm_depth), graphs[ci],
                                        targets[ci], hyper, rng);
        BenchmarkRow& row = rep.rows[job];
        row.cell = c;
        row.run = run;
        row.seed = rng.key();
        row.score = s;
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < std::min(opt.threads, n_jobs); ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return rep;
}

}  // namespace ggl

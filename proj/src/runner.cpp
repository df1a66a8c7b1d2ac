#include "ggl/runner.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "ggl/baselines.hpp"
#include "ggl/benchlab.hpp"
#include "ggl/errors.hpp"
#include "ggl/format.hpp"
#include "ggl/games.hpp"
#include "ggl/graph.hpp"
#include "ggl/linalg.hpp"
#include "ggl/metrics.hpp"
#include "ggl/nets.hpp"
#include "ggl/solvers.hpp"
#include "ggl/uat.hpp"

namespace fs = std::filesystem;

namespace ggl {

std::string git_blob_hash(const std::string& content) {
  std::string data = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  char hex[2 * SHA_DIGEST_LENGTH + 1];
  for (int k = 0; k < SHA_DIGEST_LENGTH; ++k) std::snprintf(hex + 2 * k, 3, "%02x", digest[k]);
  return std::string(hex, 2 * SHA_DIGEST_LENGTH);
}

namespace {

// Collects output files and manifest entries of one run.
class RunOutput {
 public:
  RunOutput(const Config& cfg) : cfg_(cfg), dir_(cfg.str("output.dir")) { fs::create_directories(dir_); }

  void file(const std::string& name, const std::string& content) {
    write(name, content);
    entries_ += "output." + name + ".hash=" + git_blob_hash(content) + "\n";
  }
  // Written but excluded from the manifest hash (timings).
  void volatile_file(const std::string& name, const std::string& content) { write(name, content); }
  void entry(const std::string& key, const std::string& value) { entries_ += key + "=" + value + "\n"; }
  void entry(const std::string& key, double value) { entry(key, format_double(value)); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void finish() {
    std::string body = cfg_.resolved() + entries_;
    write("manifest", body + "hash=" + git_blob_hash(body) + "\n");
  }

 private:
  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << content;
  }
  const Config& cfg_;
  fs::path dir_;
  std::string entries_;
};

Graph graph_from(const Config& cfg) {
  return make_graph(parse_graph_kind(cfg.str("graph.kind")), cfg.integer("graph.n"), cfg.u64("graph.seed"));
}

LQParams lq_params_from(const Config& cfg) {
  LQParams p;
  p.a = cfg.real("model.a");
  p.sigma = cfg.real("model.sigma");
  p.q = cfg.real("model.q");
  p.eps = cfg.real("model.eps");
  p.c = cfg.real("model.c");
  p.delta0 = cfg.real("model.delta0");
  p.T = cfg.real("model.T");
  return p;
}

std::unique_ptr<GameModel> model_from(const Config& cfg, const Graph& g, RunOutput& out) {
  switch (parse_model(cfg.str("model"))) {
    case ModelKind::lq: return lq_model(g, lq_params_from(cfg));
    case ModelKind::nonlq: return nonlq_model(g, lq_params_from(cfg));
    case ModelKind::portfolio: {
      Rng rng = Rng(cfg.u64("seed")).substream("portfolio");
      PortfolioParams p = sample_portfolio_params(g.n(), rng);
      p.T = cfg.real("model.T");
      if (cfg.explicitly_set("model.delta0")) p.delta0 = cfg.real("model.delta0");
      for (int i = 0; i < g.n(); ++i) {
        const std::string s = "." + std::to_string(i + 1);
        out.entry("param.mu" + s, p.mu(i));
        out.entry("param.nu" + s, p.nu(i));
        out.entry("param.sigma" + s, p.sigma(i));
        out.entry("param.delta" + s, p.delta(i));
        out.entry("param.theta" + s, p.theta(i));
      }
      out.entry("param.delta0", p.delta0);
      return portfolio_model(g, p);
    }
  }
  throw ParameterError("unknown model");
}

TrainConfig train_config_from(const Config& cfg) {
  TrainConfig t;
  t.n_t = cfg.integer("train.n_t");
  t.n_round = cfg.integer("train.n_round");
  t.n_epoch = cfg.integer("train.n_epoch");
  t.n_batch = cfg.integer("train.n_batch");
  t.lr = cfg.real("train.lr");
  t.gamma = cfg.real("train.gamma");
  t.tau = cfg.integer("train.tau");
  t.arch = parse_arch(cfg.str("arch"));
  t.solver = parse_solver(cfg.str("train.solver"));
  t.hidden = cfg.integer("arch.hidden");
  t.ntm_depth = cfg.integer("arch.ntm_depth");
  t.ntm_channels = cfg.integer("arch.ntm_channels");
  t.skip = cfg.flag("arch.skip");
  t.seed = cfg.u64("seed");
  t.validate();
  return t;
}

void graph_info(const Config& cfg, RunOutput& out, std::ostream& os) {
  Graph g = graph_from(cfg);
  const int n = g.n(), e = g.edge_count();
  Eigen::VectorXd ev = symmetric_eigenvalues(laplacian(g));
  std::ostringstream csv;
  csv << "quantity,value\n";
  auto emit = [&](const std::string& k, const std::string& v) {
    os << k << ": " << v << '\n';
    csv << k << ',' << v << '\n';
    out.entry("result." + k, v);
  };
  emit("vertices", std::to_string(n));
  emit("edges", std::to_string(e));
  emit("diameter", std::to_string(diameter(g)));
  emit("edge_density", std::to_string(e) + "/" + std::to_string(n * (n - 1) / 2));
  emit("edge_density_value", format_double(g.edge_density()));
  int dmin = n, dmax = 0;
  for (int v = 0; v < n; ++v) {
    dmin = std::min(dmin, g.degree(v));
    dmax = std::max(dmax, g.degree(v));
  }
  emit("min_degree", std::to_string(dmin));
  emit("max_degree", std::to_string(dmax));
  emit("laplacian_min_eigenvalue", format_double(ev.minCoeff()));
  emit("laplacian_max_eigenvalue", format_double(ev.maxCoeff()));
  out.file("results.csv", csv.str());
  out.file("graph.txt", g.to_edge_list());
}

void param_count(const Config& cfg, RunOutput& out, std::ostream& os) {
  Graph g = graph_from(cfg);
  const int n = g.n();
  const ArchKind arch = parse_arch(cfg.str("arch"));
  NetworkSpec spec;
  spec.kind = arch;
  spec.fnn.layer_sizes = {n, cfg.integer("arch.hidden"), 1};
  spec.fnn.activation = Activation::relu;
  spec.fnn.skip = cfg.flag("arch.skip");
  spec.ntm.player = cfg.integer("arch.player") - 1;
  spec.ntm.depth = cfg.integer("arch.ntm_depth");
  spec.ntm.channels = cfg.integer("arch.ntm_channels");
  spec.ntm.skip = cfg.flag("arch.skip");
  spec.cheb.features = {1, 64, 1};
  ParamCount c = count_params(spec, g);
  const int depth = cfg.integer("arch.ntm_depth");
  const long width_n = fnn_width_n_count(n, depth);
  const long bound = ntm_param_bound(n, g.edge_count(), depth, cfg.integer("arch.ntm_channels"));
  os << to_string(arch) << " trainable parameters: " << c.trainable << '\n';
  os << "frozen entries: " << c.frozen << '\n';
  os << "width-N FNN with K = " << depth << ": " << width_n << '\n';
  os << "NTM bound with K = " << depth << ": " << bound << '\n';
  // Trainable share against the width-N FNN next to channels x edge density.
  const double ratio = static_cast<double>(c.trainable) / static_cast<double>(width_n);
  const double heuristic = cfg.integer("arch.ntm_channels") * g.edge_density();
  os << "ratio to width-N FNN: " << format_double(ratio) << " (channels x edge density " << format_double(heuristic)
     << ")\n";
  std::ostringstream csv;
  csv << "arch,trainable,frozen,fnn_width_n,ntm_bound,ratio,channels_x_density\n"
      << to_string(arch) << ',' << c.trainable << ',' << c.frozen << ',' << width_n << ',' << bound << ','
      << format_double(ratio) << ',' << format_double(heuristic) << '\n';
  out.entry("result.trainable", std::to_string(c.trainable));
  out.file("results.csv", csv.str());
}

void uat_mode(const Config& cfg, RunOutput& out, std::ostream& os) {
  Graph g = graph_from(cfg);
  const std::string family = cfg.str("uat.family");
  ContractionFamily fam = family == "linear"
                              ? linear_contraction_family(g, cfg.real("uat.rho"), cfg.u64("seed"), cfg.integer("uat.channels"))
                          : family == "tanh"
                              ? tanh_contraction_family(g, cfg.real("uat.rho"), cfg.real("uat.kappa"), cfg.integer("uat.knots"))
                              : throw ParameterError("unknown uat.family '" + family + "'");
  Rng rng = Rng(cfg.u64("seed")).substream("uat");
  std::vector<UatRow> rows = uat_check(fam, cfg.int_list("uat.depths"), cfg.integer("uat.samples"), rng);
  std::ostringstream csv;
  csv << "depth,sup_error,bound,iterate_mismatch,pass\n";
  bool all = true;
  for (const UatRow& r : rows) {
    csv << r.depth << ',' << format_double(r.sup_error) << ',' << format_double(r.bound) << ','
        << format_double(r.iterate_mismatch) << ',' << (r.pass ? 1 : 0) << '\n';
    os << "K=" << r.depth << " sup error " << format_double(r.sup_error) << " bound " << format_double(r.bound)
       << (r.pass ? " ok" : " VIOLATED") << '\n';
    all = all && r.pass;
  }
  out.entry("result.delta", fam.delta);
  out.entry("result.all_pass", all ? "true" : "false");
  out.file("results.csv", csv.str());
}

std::vector<BenchmarkCell> bench_cells(const Config& cfg) {
  std::vector<BenchmarkCell> cells;
  for (const std::string& a : cfg.list("bench.archs"))
    for (const std::string& gk : cfg.list("bench.graphs"))
      for (const std::string& t : cfg.list("bench.targets")) {
        BenchmarkCell c;
        c.arch = parse_arch(a);
        c.graph = parse_graph_kind(gk);
        c.target = parse_target(t);
        c.player = cfg.integer("bench.player") - 1;
        c.ntm_depth = cfg.integer("bench.depth");
        cells.push_back(c);
      }
  if (cells.empty()) throw ParameterError("benchmark matrix is empty");
  return cells;
}

void supervised(const Config& cfg, RunOutput& out, std::ostream& os) {
  BenchmarkOptions opt;
  opt.n = cfg.integer("graph.n");
  opt.graph_seed = cfg.u64("graph.seed");
  opt.n_runs = cfg.integer("bench.runs");
  opt.seed = cfg.u64("seed");
  opt.threads = cfg.integer("threads");
  opt.epoch_scale = cfg.real("bench.epoch_scale");
  opt.n_test = cfg.integer("bench.n_test");
  BenchmarkReport rep = run_benchmark(bench_cells(cfg), opt);
  std::ostringstream res, bench, summary;
  rep.write_csv(res, false);
  rep.write_csv(bench, true);
  rep.write_summary(summary);
  out.file("results.csv", res.str());
  out.file("summary.txt", summary.str());
  out.volatile_file("benchmark.csv", bench.str());
  os << summary.str();
}

// Also writes the baseline to baseline.csv (Riccati matrices every
// `stride` fine nodes, or the constant portfolio equilibrium).
Strategy baseline_strategy(const GameModel& game, const Config& cfg, int stride, RunOutput& out,
                           std::shared_ptr<void>& keep) {
  if (game.kind() == ModelKind::lq) {
    auto sol = std::make_shared<RiccatiSolution>(
        solve_lq_riccati(static_cast<const LQModel&>(game), cfg.integer("metrics.fine_steps")));
    keep = sol;
    std::ostringstream csv;
    write_riccati_csv(csv, *sol, stride);
    out.file("baseline.csv", csv.str());
    return [sol](double t, const Mat& x) { return sol->strategy(t, x); };
  }
  if (game.kind() == ModelKind::portfolio) {
    KappaForm form = cfg.str("model.kappa_form") == "displayed" ? KappaForm::displayed : KappaForm::derived;
    if (cfg.str("model.kappa_form") != "derived" && cfg.str("model.kappa_form") != "displayed")
      throw ParameterError("model.kappa_form must be derived or displayed");
    PortfolioBaseline pb = portfolio_constant_ne(static_cast<const PortfolioModel&>(game), form);
    std::ostringstream csv;
    write_portfolio_csv(csv, pb);
    out.file("baseline.csv", csv.str());
    Mat row = pb.alpha.transpose();
    return [row](double, const Mat& x) -> Mat { return row.replicate(x.rows(), 1); };
  }
  return {};
}

void report_metrics(const Config& cfg, const GameModel& game, StrategyProfile& profile, RunOutput& out,
                    std::ostream& os) {
  const int n_paths = cfg.integer("metrics.n_paths");
  const int fine = cfg.integer("metrics.fine_steps");
  const Rng root = Rng(cfg.u64("seed")).substream("metrics");
  std::ostringstream csv;
  csv << "metric,value\n";
  auto emit = [&](const std::string& k, double v) {
    csv << k << ',' << format_double(v) << '\n';
    out.entry("result." + k, v);
    os << k << ": " << format_double(v) << '\n';
  };
  std::shared_ptr<void> keep;
  Strategy base = baseline_strategy(game, cfg, std::max(1, fine / profile.steps()), out, keep);
  Strategy cand = profile.strategy();
  if (base) {
    auto [rx, ra] = coupled_rmse(game, base, cand, fine, profile.steps(), n_paths, root.substream("rmse"));
    emit("rmse_x", rx);
    emit("rmse_alpha", ra);
    if (cfg.flag("metrics.mre")) {
      MetricResult m = mre(game, base, cand, fine, profile.steps(), n_paths, root.substream("mre"));
      emit("mre", m.mre);
      for (int i = 0; i < game.n(); ++i) {
        emit("v_baseline." + std::to_string(i + 1), m.v_baseline(i));
        emit("v_candidate." + std::to_string(i + 1), m.v_candidate(i));
      }
    }
  } else {
    // No semi-explicit reference for this model: report the candidate's costs.
    CostEstimate c = expected_cost(game, cand, TimeGrid(game.horizon(), profile.steps()), n_paths, root.substream("cost"));
    for (int i = 0; i < game.n(); ++i) {
      emit("v_candidate." + std::to_string(i + 1), c.mean(i));
      emit("v_candidate_se." + std::to_string(i + 1), c.std_error(i));
    }
  }
  out.file("results.csv", csv.str());
  if (cfg.flag("metrics.paths_csv")) {
    PathBundle b = simulate(game, cand, TimeGrid(game.horizon(), profile.steps()), cfg.integer("metrics.paths_count"),
                            root.substream("paths"));
    const std::string tmp = out.path("paths.csv");
    write_paths_csv(tmp, b);
    std::ifstream in(tmp, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out.file("paths.csv", ss.str());
  }
}

void solve(const Config& cfg, RunOutput& out, std::ostream& os) {
  Graph g = graph_from(cfg);
  std::unique_ptr<GameModel> game = model_from(cfg, g, out);
  TrainConfig tc = train_config_from(cfg);
  TrainResult res = dfp_train(*game, tc);
  std::ostringstream hist;
  hist << "round,player,epoch,loss\n";
  for (const LossRecord& r : res.history)
    hist << r.round << ',' << r.player + 1 << ',' << r.epoch << ',' << format_double(r.loss) << '\n';
  out.file("loss_history.csv", hist.str());
  std::ostringstream orders;
  for (const auto& o : res.orders) {
    for (std::size_t k = 0; k < o.size(); ++k) orders << (k ? " " : "") << o[k] + 1;
    orders << ';';
  }
  out.entry("train.orders", orders.str());
  res.profile->save(out.path("checkpoint.bin"));
  std::ifstream in(out.path("checkpoint.bin"), std::ios::binary);
  std::stringstream blob;
  blob << in.rdbuf();
  out.entry("output.checkpoint.bin.hash", git_blob_hash(blob.str()));
  if (tc.n_round > 0) os << "final-round median loss: " << format_double(round_median_loss(res.history, tc.n_round - 1)) << '\n';
  report_metrics(cfg, *game, *res.profile, out, os);
}

void evaluate(const Config& cfg, RunOutput& out, std::ostream& os) {
  const std::string ckpt = cfg.str("evaluate.checkpoint");
  if (ckpt.empty()) throw ParameterError("mode=evaluate requires evaluate.checkpoint");
  Graph g = graph_from(cfg);
  std::unique_ptr<GameModel> game = model_from(cfg, g, out);
  TrainConfig tc = train_config_from(cfg);
  StrategyProfile profile(*game, tc, Rng(tc.seed));
  profile.load(ckpt);
  report_metrics(cfg, *game, profile, out, os);
}

}  // namespace

void execute(const Config& cfg, std::ostream& os) {
  const std::string mode = cfg.str("mode");
  if (mode.empty()) throw ConfigError("missing required key 'mode'");
  using Fn = void (*)(const Config&, RunOutput&, std::ostream&);
  Fn fn = mode == "graph-info"    ? graph_info
          : mode == "param-count" ? param_count
          : mode == "uat-check"   ? uat_mode
          : mode == "supervised"  ? supervised
          : mode == "solve"       ? solve
          : mode == "evaluate"    ? evaluate
                                  : nullptr;
  if (!fn) throw ConfigError("unknown mode '" + mode + "'");
  RunOutput out(cfg);
  fn(cfg, out, os);
  out.finish();
}

int run(const Config& cfg, std::ostream& out, std::ostream& err) {
  try {
    execute(cfg, out);
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << '\n';
    return exit_config;
  } catch (const UnsupportedError& e) {
    err << "error: unsupported: " << e.what() << '\n';
    return exit_unsupported;
  } catch (const NumericalError& e) {
    err << "error: numerical: " << e.what() << '\n';
    return exit_numerical;
  } catch (const ParameterError& e) {
    err << "error: parameter: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: runtime: " << e.what() << '\n';
    return exit_failure;
  }
}

int run(const std::string& config_path, std::ostream& out, std::ostream& err) {
  try {
    return run(Config::load(config_path), out, err);
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << '\n';
    return exit_config;
  }
}

}  // namespace ggl

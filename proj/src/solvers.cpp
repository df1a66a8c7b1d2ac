#include "ggl/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "ggl/checkpoint.hpp"
#include "ggl/errors.hpp"

namespace ggl {

SolverKind parse_solver(const std::string& s) {
  if (s == "dp") return SolverKind::dp;
  if (s == "dbsde") return SolverKind::dbsde;
  throw ParameterError("unknown solver '" + s + "'");
}

std::string to_string(SolverKind s) { return s == SolverKind::dp ? "dp" : "dbsde"; }

void TrainConfig::validate() const {
  if (n_t < 1 || n_round < 0 || n_epoch < 1 || n_batch < 1)
    throw ParameterError("training counts must be positive (n_round may be 0)");
  if (!(lr > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("decay gamma must lie in (0,1)");
  if (tau < 1) throw ParameterError("decay period tau must be >= 1");
  if (hidden < 1 || ntm_depth < 2 || ntm_channels < 1) throw ParameterError("invalid network size");
  if (arch == ArchKind::cheb) throw ParameterError("game solvers support fnn and ntm architectures only");
}

NetworkSpec strategy_net_spec(const GameModel& game, const TrainConfig& cfg, int player) {
  const int n = game.n();
  const bool vector_out = cfg.solver == SolverKind::dbsde;
  NetworkSpec s;
  s.kind = cfg.arch;
  s.fnn.layer_sizes = {n, cfg.hidden, vector_out ? n : 1};
  s.fnn.activation = Activation::relu;
  s.fnn.skip = cfg.skip;
  s.ntm.player = player;
  s.ntm.depth = cfg.ntm_depth;
  s.ntm.channels = cfg.ntm_channels;
  s.ntm.activation = Activation::relu;
  s.ntm.skip = cfg.skip;
  s.ntm.vector_output = vector_out;
  return s;
}

NetworkSpec value_net_spec(const GameModel& game) {
  NetworkSpec s;
  s.kind = ArchKind::fnn;
  s.fnn.layer_sizes = {game.n(), 32, 32, 1};
  s.fnn.activation = Activation::tanh;
  s.fnn.skip = false;
  return s;
}

StrategyProfile::StrategyProfile(const GameModel& game, const TrainConfig& cfg, const Rng& rng)
    : game_(&game), cfg_(cfg) {
  cfg_.validate();
  if (cfg_.solver == SolverKind::dbsde && (!game.has_minimizer() || game.controlled_diffusion()))
    throw UnsupportedError("the deep BSDE solver cannot be applied to the " + to_string(game.kind()) +
                           " model: controlled diffusion without an explicit minimizer");
  const int n = game.n();
  nets_.resize(n);
  for (int i = 0; i < n; ++i) {
    NetworkSpec spec = strategy_net_spec(game, cfg_, i);
    for (int k = 0; k < cfg_.n_t; ++k) {
      Rng r = rng.substream("init", {static_cast<uint64_t>(i), static_cast<uint64_t>(k)});
      nets_[i].push_back(make_network(spec, game.graph(), r));
    }
    if (cfg_.solver == SolverKind::dbsde) {
      Rng r = rng.substream("init_value", {static_cast<uint64_t>(i)});
      y0_.push_back(make_network(value_net_spec(game), game.graph(), r));
    }
  }
}

int StrategyProfile::node(double t) const {
  int k = static_cast<int>(std::floor(t / h() + 1e-9));
  return std::clamp(k, 0, cfg_.n_t - 1);
}

Mat StrategyProfile::evaluate(double t, const Mat& x) {
  const int n = players();
  const int k = node(t);
  Mat out(x.rows(), n);
  if (cfg_.solver == SolverKind::dp) {
    for (int i = 0; i < n; ++i) out.col(i) = nets_[i][k]->evaluate(x).col(0);
    return out;
  }
  Mat z(x.rows(), n);
  for (int i = 0; i < n; ++i) z.col(i) = nets_[i][k]->evaluate(x).col(i);
  return game_->minimizer(x, z);
}

Strategy StrategyProfile::strategy() {
  return [this](double t, const Mat& x) { return evaluate(t, x); };
}

std::vector<Parameter*> StrategyProfile::player_parameters(int player) {
  std::vector<Parameter*> out;
  for (auto& net : nets_.at(player))
    for (Parameter* p : net->parameters()) out.push_back(p);
  if (!y0_.empty())
    for (Parameter* p : y0_.at(player)->parameters()) out.push_back(p);
  return out;
}

std::vector<std::pair<std::string, const Parameter*>> StrategyProfile::named_parameters() const {
  std::vector<std::pair<std::string, const Parameter*>> out;
  for (int i = 0; i < static_cast<int>(nets_.size()); ++i) {
    for (int k = 0; k < cfg_.n_t; ++k)
      for (const Parameter* p : static_cast<const Network&>(*nets_[i][k]).parameters())
        out.emplace_back(checkpoint_name(i + 1, k, p->name), p);
    if (!y0_.empty())
      for (const Parameter* p : static_cast<const Network&>(*y0_[i]).parameters())
        out.emplace_back("player" + std::to_string(i + 1) + "/y0/" + p->name, p);
  }
  return out;
}

void StrategyProfile::save(const std::string& path) const {
  std::vector<Parameter> copies;
  auto named = named_parameters();
  copies.reserve(named.size());
  for (const auto& [name, p] : named) copies.emplace_back(name, p->value, p->mask);
  std::vector<const Parameter*> ptrs;
  for (const Parameter& p : copies) ptrs.push_back(&p);
  save_checkpoint(path, ptrs);
}

void StrategyProfile::load(const std::string& path) {
  std::vector<Parameter> loaded = load_checkpoint(path);
  auto named = named_parameters();
  if (loaded.size() != named.size())
    throw ParameterError("checkpoint has " + std::to_string(loaded.size()) + " parameters, profile expects " +
                         std::to_string(named.size()));
  for (std::size_t k = 0; k < named.size(); ++k) {
    Parameter* dst = const_cast<Parameter*>(named[k].second);
    const Parameter& src = loaded[k];
    if (src.name != named[k].first || src.value.rows() != dst->value.rows() || src.value.cols() != dst->value.cols())
      throw ParameterError("checkpoint entry '" + src.name + "' does not match '" + named[k].first + "'");
    if (src.mask != dst->mask) throw ParameterError("checkpoint mask of '" + src.name + "' differs");
    dst->value = src.value;
  }
}

namespace {

Mat draw_initial(Rng& r, int batch, int n, double delta0) {
  Mat x(batch, n);
  for (int b = 0; b < batch; ++b)
    for (int i = 0; i < n; ++i) x(b, i) = r.uniform(-delta0, delta0);
  return x;
}

Mat draw_normals(Rng& r, int rows, int cols) {
  Mat m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = r.normal();
  return m;
}

}  // namespace

Var dp_player_loss(Tape& t, StrategyProfile& profile, int player, int batch, const Rng& rng) {
  const GameModel& game = profile.game();
  const int n = game.n();
  if (player < 0 || player >= n) throw ParameterError("player index out of range");
  const double h = profile.h(), sh = std::sqrt(h);
  Rng r = rng;
  Var x = t.constant(draw_initial(r, batch, n, game.delta0()));
  Var cost = t.constant(Mat::Zero(batch, 1));
  for (int k = 0; k < profile.steps(); ++k) {
    Mat shocks = draw_normals(r, batch, n + 1);
    std::vector<Var> cols;
    cols.reserve(n);
    for (int j = 0; j < n; ++j) cols.push_back(profile.net(j, k).forward(t, x, j == player));
    Var alpha = concat(cols);
    cost = add(cost, scale(game.running_cost(t, x, cols[player], player), h));
    Mat xi = shocks.rightCols(n), xi0 = shocks.col(0);
    x = add(add(x, scale(game.drift(t, x, alpha), h)), game.noise(t, x, alpha, xi, xi0, sh));
  }
  cost = add(cost, game.terminal_cost(t, x, player));
  return mean(cost);
}

Var dbsde_player_loss(Tape& t, StrategyProfile& profile, int player, int batch, const Rng& rng) {
  const GameModel& game = profile.game();
  if (!game.has_minimizer() || game.controlled_diffusion())
    throw UnsupportedError("the deep BSDE solver cannot be applied to the " + to_string(game.kind()) +
                           " model: controlled diffusion without an explicit minimizer");
  const int n = game.n();
  if (player < 0 || player >= n) throw ParameterError("player index out of range");
  const double h = profile.h(), sh = std::sqrt(h);
  Rng r = rng;
  Mat chi = draw_initial(r, batch, n, game.delta0());
  Var y = profile.value_net(player).forward(t, t.constant(chi), true);
  // Driver h^i = f^i(alpha_hat(z)) - z_i^2 / sigma^2 requires the constant
  // diffusion coefficient of the uncontrolled-noise models.
  const double sig = game.sigma(chi.topRows(1), Mat::Zero(1, n))(0, player);
  for (int k = 0; k < profile.steps(); ++k) {
    Mat shocks = draw_normals(r, batch, n + 1);
    Mat xi = shocks.rightCols(n);
    Var chi_v = t.constant(chi);
    Var z = profile.net(player, k).forward(t, chi_v, true);
    Var zi = slice(z, player, 1);
    Var a_hat = game.minimizer(t, chi_v, zi, player);
    Var driver = sub(game.running_cost(t, chi_v, a_hat, player), scale(square(zi), 1.0 / (sig * sig)));
    Var dw = row_sum(hadamard(z, t.constant(Mat(sh * xi))));
    y = add(sub(y, scale(driver, h)), dw);

    // Forward state under mu^i: others follow their own recovered controls,
    // player i the reference q * deviation (the minimizer at z_i = 0).
    Mat zs(batch, n);
    for (int j = 0; j < n; ++j)
      zs.col(j) = j == player ? Eigen::VectorXd::Zero(batch) : Eigen::VectorXd(profile.net(j, k).evaluate(chi).col(j));
    Mat alpha = game.minimizer(chi, zs);
    Mat sig_m = game.sigma(chi, alpha);
    Mat next = chi + h * game.drift(chi, alpha);
    next.array() += sh * sig_m.array() * xi.array();
    chi = std::move(next);
  }
  Var mismatch = sub(y, game.terminal_cost(t, t.constant(chi), player));
  return mean(square(mismatch));
}

TrainResult dfp_train(const GameModel& game, const TrainConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);
  TrainResult res;
  res.profile = std::make_unique<StrategyProfile>(game, cfg, root);
  StrategyProfile& prof = *res.profile;
  const int n = game.n();
  for (int round = 0; round < cfg.n_round; ++round) {
    const double lr = lr_schedule(cfg.lr, round, cfg.gamma, cfg.tau);
    Rng perm_rng = root.substream("perm", {static_cast<uint64_t>(round)});
    std::vector<int> order = perm_rng.permutation(n);
    res.orders.push_back(order);
    for (int player : order) {
      std::vector<Parameter*> params = prof.player_parameters(player);
      for (int epoch = 0; epoch < cfg.n_epoch; ++epoch) {
        Rng batch_rng = root.substream("batch", {static_cast<uint64_t>(round), static_cast<uint64_t>(player),
                                                 static_cast<uint64_t>(epoch)});
        zero_grads(params);
        Tape t;
        Var loss = cfg.solver == SolverKind::dp ? dp_player_loss(t, prof, player, cfg.n_batch, batch_rng)
                                                : dbsde_player_loss(t, prof, player, cfg.n_batch, batch_rng);
        double lv = loss.scalar();
        if (!std::isfinite(lv))
          throw NumericalError("non-finite loss for player " + std::to_string(player + 1) + " in round " +
                               std::to_string(round) + ", epoch " + std::to_string(epoch));
        t.backward(loss);
        adam_step(params, lr);
        res.history.push_back({round, player, epoch, lv});
      }
    }
  }
  return res;
}

double round_median_loss(const std::vector<LossRecord>& history, int round) {
  std::vector<double> v;
  for (const LossRecord& r : history)
    if (r.round == round) v.push_back(r.loss);
  if (v.empty()) throw ParameterError("no losses recorded for round " + std::to_string(round));
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

TrainResult nonlq_baseline(const GameModel& game, TrainConfig cfg) {
  cfg.arch = ArchKind::fnn;
  cfg.solver = SolverKind::dp;
  return dfp_train(game, cfg);
}

}  // namespace ggl

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ggl/autodiff.hpp"
#include "ggl/games.hpp"
#include "ggl/nets.hpp"
#include "ggl/optim.hpp"
#include "ggl/rng.hpp"
#include "ggl/sdesim.hpp"

namespace ggl {

enum class SolverKind { dp, dbsde };
SolverKind parse_solver(const std::string& s);
std::string to_string(SolverKind s);

struct TrainConfig {
  int n_t = 50;
  int n_round = 40;
  int n_epoch = 150;
  int n_batch = 256;
  double lr = 0.001;
  double gamma = 0.5;
  int tau = 30;
  ArchKind arch = ArchKind::fnn;
  SolverKind solver = SolverKind::dp;
  int hidden = 32;      // FNN hidden width
  int ntm_depth = 2;    // K
  int ntm_channels = 3; // M
  bool skip = true;
  uint64_t seed = 0;

  void validate() const;
};

// Per player and per grid node one network. For the direct solver the
// network outputs the player's control; for the BSDE solver it outputs the
// adjoint Z in R^N and the control is recovered from the model's minimizer.
// The BSDE solver also keeps one initial-value network per player.
class StrategyProfile {
 public:
  StrategyProfile(const GameModel& game, const TrainConfig& cfg, const Rng& rng);

  int players() const { return static_cast<int>(nets_.size()); }
  int steps() const { return cfg_.n_t; }
  double h() const { return game_->horizon() / cfg_.n_t; }
  SolverKind solver() const { return cfg_.solver; }
  const GameModel& game() const { return *game_; }

  Network& net(int player, int k) { return *nets_.at(player).at(k); }
  Network& value_net(int player) { return *y0_.at(player); }
  // Grid node whose network governs time t (left-continuous hold).
  int node(double t) const;

  // Controls of all players, B x N.
  Mat evaluate(double t, const Mat& x);
  Strategy strategy();

  std::vector<Parameter*> player_parameters(int player);
  // Named "player{i}/t{k}/{param}" and "player{i}/y0/{param}" (1-based i).
  std::vector<std::pair<std::string, const Parameter*>> named_parameters() const;
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  const GameModel* game_;
  TrainConfig cfg_;
  std::vector<std::vector<std::unique_ptr<Network>>> nets_;
  std::vector<std::unique_ptr<Network>> y0_;
};

NetworkSpec strategy_net_spec(const GameModel& game, const TrainConfig& cfg, int player);
NetworkSpec value_net_spec(const GameModel& game);

// Monte-Carlo expected cost of player i, differentiable in player i's
// networks. Other players' networks run on the tape with constant weights,
// so their feedback responds to the simulated states but their parameters
// receive no gradient.
Var dp_player_loss(Tape& t, StrategyProfile& profile, int player, int batch, const Rng& rng);

// Mean squared terminal mismatch (Y_T - g^i(chi_T))^2 of the forward BSDE
// rollout for player i. Throws UnsupportedError for controlled diffusions.
Var dbsde_player_loss(Tape& t, StrategyProfile& profile, int player, int batch, const Rng& rng);

struct LossRecord {
  int round = 0;
  int player = 0;
  int epoch = 0;
  double loss = 0.0;
};

struct TrainResult {
  std::unique_ptr<StrategyProfile> profile;
  std::vector<LossRecord> history;
  std::vector<std::vector<int>> orders;  // player order of each round
};

// Alternating fictitious play: each round draws a player permutation and
// updates the players one after another with n_epoch Adam steps each.
TrainResult dfp_train(const GameModel& game, const TrainConfig& cfg);

// Median of the recorded losses of one round.
double round_median_loss(const std::vector<LossRecord>& history, int round);

// Reference equilibrium for the cubic model: the trained FNN-DP profile.
TrainResult nonlq_baseline(const GameModel& game, TrainConfig cfg);

}  // namespace ggl

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "ggl/autodiff.hpp"
#include "ggl/games.hpp"
#include "ggl/rng.hpp"

namespace ggl {

struct TimeGrid {
  double T = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double horizon, int n_steps);
  double h() const { return T / steps; }
  double time(int k) const { return T * k / steps; }
};

// Feedback control for a batch of states (rows of x) at time t.
using Strategy = std::function<Mat(double t, const Mat& x)>;

// Paths for players 0..N-1. states[k] and strategies[k] are n_paths x N at
// grid node k; noise[k] (only when requested) is n_paths x (N+1) with the
// common shock in column 0 and the idiosyncratic shocks in columns 1..N.
struct PathBundle {
  TimeGrid grid;
  int first_path = 0;
  int n_paths = 0;
  std::vector<Mat> states;      // steps + 1 entries
  std::vector<Mat> strategies;  // steps entries
  std::vector<Mat> noise;       // steps entries or empty
};

struct SimOptions {
  int block_size = 256;
  bool keep_noise = false;
};

// Euler scheme X_{k+1} = X_k + b h + sigma sqrt(h) xi + sigma0 sqrt(h) xi0.
// Path p draws from rng.substream("path", {p}): first N uniforms for X_0,
// then per step the common normal followed by N idiosyncratic normals.
PathBundle simulate(const GameModel& game, const Strategy& strategy, const TimeGrid& grid, int n_paths,
                    const Rng& rng, const SimOptions& opts = {});

// Same paths delivered block by block to keep memory bounded.
void simulate_blocks(const GameModel& game, const Strategy& strategy, const TimeGrid& grid, int n_paths,
                     const Rng& rng, const std::function<void(const PathBundle&)>& visit,
                     const SimOptions& opts = {});

// Baseline on the fine grid and candidate on the coarse grid, driven by the
// same Brownian path: each coarse increment is the sum of the r = fine/coarse
// fine increments. The candidate's states and controls are held constant on
// each coarse interval and reported on the fine grid.
std::pair<PathBundle, PathBundle> simulate_coupled(const GameModel& game, const Strategy& baseline,
                                                   const Strategy& candidate, int fine_steps, int coarse_steps,
                                                   int n_paths, const Rng& rng, const SimOptions& opts = {});

void simulate_coupled_blocks(const GameModel& game, const Strategy& baseline, const Strategy& candidate,
                             int fine_steps, int coarse_steps, int n_paths, const Rng& rng,
                             const std::function<void(const PathBundle& fine, const PathBundle& held)>& visit,
                             const SimOptions& opts = {});

// Draws X_0 ~ U(-delta0, delta0)^N and the per-step shocks of paths
// [first, first + count) on a grid of `steps` intervals.
void draw_paths(const Rng& rng, int n, double delta0, int steps, int first, int count, Mat& x0,
                std::vector<Mat>& noise);

// Writes path, t, player, state, strategy rows (fine grid, left nodes).
void write_paths_csv(const std::string& path, const PathBundle& bundle);

}  // namespace ggl

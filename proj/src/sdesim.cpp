#include "ggl/sdesim.hpp"

#include <cmath>
#include <fstream>

#include "ggl/errors.hpp"
#include "ggl/format.hpp"

namespace ggl {

TimeGrid::TimeGrid(double horizon, int n_steps) : T(horizon), steps(n_steps) {
  if (!(horizon > 0.0)) throw ParameterError("time grid needs T > 0");
  if (n_steps < 1) throw ParameterError("time grid needs at least one step");
}

void draw_paths(const Rng& rng, int n, double delta0, int steps, int first, int count, Mat& x0,
                std::vector<Mat>& noise) {
  x0.resize(count, n);
  noise.assign(steps, Mat(count, n + 1));
  for (int p = 0; p < count; ++p) {
    Rng r = rng.substream("path", {static_cast<uint64_t>(first + p)});
    for (int i = 0; i < n; ++i) x0(p, i) = r.uniform(-delta0, delta0);
    for (int k = 0; k < steps; ++k)
      for (int c = 0; c <= n; ++c) noise[k](p, c) = r.normal();
  }
}

namespace {

void check_finite(const Mat& x, int first, int step) {
  if (x.allFinite()) return;
  for (Eigen::Index p = 0; p < x.rows(); ++p)
    if (!x.row(p).allFinite())
      throw NumericalError("simulation overflow on path " + std::to_string(first + p) + " at step " +
                           std::to_string(step));
}

void euler_step(const GameModel& game, const Mat& x, const Mat& alpha, const Mat& shocks, double h, Mat& next) {
  const double sh = std::sqrt(h);
  const Eigen::Index n = x.cols();
  next = x + h * game.drift(x, alpha);
  next.array() += sh * game.sigma(x, alpha).array() * shocks.rightCols(n).array();
  Mat s0 = game.sigma0(x, alpha);
  next.array() += sh * (s0.array().colwise() * shocks.col(0).array());
}

PathBundle run_block(const GameModel& game, const Strategy& strategy, const TimeGrid& grid, int first,
                     const Mat& x0, const std::vector<Mat>& noise, bool keep_noise) {
  PathBundle b;
  b.grid = grid;
  b.first_path = first;
  b.n_paths = static_cast<int>(x0.rows());
  b.states.resize(grid.steps + 1);
  b.strategies.resize(grid.steps);
  b.states[0] = x0;
  for (int k = 0; k < grid.steps; ++k) {
    b.strategies[k] = strategy(grid.time(k), b.states[k]);
    if (b.strategies[k].rows() != x0.rows() || b.strategies[k].cols() != x0.cols())
      throw ShapeError("strategy returned " + shape_str(b.strategies[k]) + " for states " + shape_str(x0));
    check_finite(b.strategies[k], first, k);
    euler_step(game, b.states[k], b.strategies[k], noise[k], grid.h(), b.states[k + 1]);
    check_finite(b.states[k + 1], first, k + 1);
  }
  if (keep_noise) b.noise = noise;
  return b;
}

PathBundle concat_blocks(const std::vector<PathBundle>& blocks, const TimeGrid& grid, int n_paths, int n,
                         bool keep_noise) {
  PathBundle out;
  out.grid = grid;
  out.n_paths = n_paths;
  out.states.assign(grid.steps + 1, Mat(n_paths, n));
  out.strategies.assign(grid.steps, Mat(n_paths, n));
  if (keep_noise) out.noise.assign(grid.steps, Mat(n_paths, n + 1));
  for (const PathBundle& b : blocks) {
    for (int k = 0; k <= grid.steps; ++k) out.states[k].middleRows(b.first_path, b.n_paths) = b.states[k];
    for (int k = 0; k < grid.steps; ++k) {
      out.strategies[k].middleRows(b.first_path, b.n_paths) = b.strategies[k];
      if (keep_noise) out.noise[k].middleRows(b.first_path, b.n_paths) = b.noise[k];
    }
  }
  return out;
}

}  // namespace

void simulate_blocks(const GameModel& game, const Strategy& strategy, const TimeGrid& grid, int n_paths,
                     const Rng& rng, const std::function<void(const PathBundle&)>& visit, const SimOptions& opts) {
  if (n_paths < 1) throw ParameterError("simulate needs at least one path");
  const int n = game.n();
  for (int first = 0; first < n_paths; first += opts.block_size) {
    int count = std::min(opts.block_size, n_paths - first);
    Mat x0;
    std::vector<Mat> noise;
    draw_paths(rng, n, game.delta0(), grid.steps, first, count, x0, noise);
    visit(run_block(game, strategy, grid, first, x0, noise, opts.keep_noise));
  }
}

PathBundle simulate(const GameModel& game, const Strategy& strategy, const TimeGrid& grid, int n_paths,
                    const Rng& rng, const SimOptions& opts) {
  std::vector<PathBundle> blocks;
  simulate_blocks(game, strategy, grid, n_paths, rng, [&](const PathBundle& b) { blocks.push_back(b); }, opts);
  return concat_blocks(blocks, grid, n_paths, game.n(), opts.keep_noise);
}

void simulate_coupled_blocks(const GameModel& game, const Strategy& baseline, const Strategy& candidate,
                             int fine_steps, int coarse_steps, int n_paths, const Rng& rng,
                             const std::function<void(const PathBundle&, const PathBundle&)>& visit,
                             const SimOptions& opts) {
  if (coarse_steps < 1 || fine_steps < 1 || fine_steps % coarse_steps != 0)
    throw ParameterError("fine steps (" + std::to_string(fine_steps) + ") must be a multiple of coarse steps (" +
                         std::to_string(coarse_steps) + ")");
  if (n_paths < 1) throw ParameterError("simulate needs at least one path");
  const int n = game.n();
  const int ratio = fine_steps / coarse_steps;
  const TimeGrid fine(game.horizon(), fine_steps), coarse(game.horizon(), coarse_steps);
  const double inv_sqrt_r = 1.0 / std::sqrt(static_cast<double>(ratio));
  for (int first = 0; first < n_paths; first += opts.block_size) {
    int count = std::min(opts.block_size, n_paths - first);
    Mat x0;
    std::vector<Mat> noise;
    draw_paths(rng, n, game.delta0(), fine_steps, first, count, x0, noise);
    PathBundle fb = run_block(game, baseline, fine, first, x0, noise, opts.keep_noise);

    std::vector<Mat> coarse_noise(coarse_steps, Mat::Zero(count, n + 1));
    for (int k = 0; k < fine_steps; ++k) coarse_noise[k / ratio] += noise[k];
    for (Mat& m : coarse_noise) m *= inv_sqrt_r;
    PathBundle cb = run_block(game, candidate, coarse, first, x0, coarse_noise, false);

    PathBundle held;
    held.grid = fine;
    held.first_path = first;
    held.n_paths = count;
    held.states.resize(fine_steps + 1);
    held.strategies.resize(fine_steps);
    for (int k = 0; k < fine_steps; ++k) {
      held.states[k] = cb.states[k / ratio];
      held.strategies[k] = cb.strategies[k / ratio];
    }
    held.states[fine_steps] = cb.states[coarse_steps];
    if (opts.keep_noise) held.noise = fb.noise;
    visit(fb, held);
  }
}

std::pair<PathBundle, PathBundle> simulate_coupled(const GameModel& game, const Strategy& baseline,
                                                   const Strategy& candidate, int fine_steps, int coarse_steps,
                                                   int n_paths, const Rng& rng, const SimOptions& opts) {
  std::vector<PathBundle> fb, cb;
  simulate_coupled_blocks(
      game, baseline, candidate, fine_steps, coarse_steps, n_paths, rng,
      [&](const PathBundle& f, const PathBundle& c) {
        fb.push_back(f);
        cb.push_back(c);
      },
      opts);
  TimeGrid fine(game.horizon(), fine_steps);
  return {concat_blocks(fb, fine, n_paths, game.n(), opts.keep_noise),
          concat_blocks(cb, fine, n_paths, game.n(), opts.keep_noise)};
}

void write_paths_csv(const std::string& path, const PathBundle& b) {
  std::ofstream f(path);
  if (!f) throw ParameterError("cannot open '" + path + "' for writing");
  f << "path,t,player,state,strategy\n";
  const int n = static_cast<int>(b.states.front().cols());
  for (int p = 0; p < b.n_paths; ++p)
    for (int k = 0; k < b.grid.steps; ++k)
      for (int i = 0; i < n; ++i)
        f << b.first_path + p << ',' << format_double(b.grid.time(k)) << ',' << i + 1 << ','
          << format_double(b.states[k](p, i)) << ',' << format_double(b.strategies[k](p, i)) << '\n';
}

}  // namespace ggl

#pragma once

#include <vector>

#include "ggl/autodiff.hpp"
#include "ggl/rng.hpp"

namespace ggl {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One Adam update with bias correction. Gradients are checked for finiteness
// before any parameter is touched; masked entries are reset to 0 afterwards.
void adam_step(const std::vector<Parameter*>& params, double lr, const AdamConfig& cfg = {});

// base * gamma^floor(round / tau)
double lr_schedule(double base, int round_index, double gamma, int tau);

// Uniform Xavier: U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))).
Mat xavier_init(Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out, Rng& rng);

void zero_grads(const std::vector<Parameter*>& params);

}  // namespace ggl

#include "ggl/optim.hpp"

#include <cmath>

#include "ggl/errors.hpp"

namespace ggl {

void adam_step(const std::vector<Parameter*>& params, double lr, const AdamConfig& cfg) {
  for (Parameter* p : params) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols()) p->zero_grad();
    if (!p->grad.allFinite()) throw NumericalError("non-finite gradient in parameter '" + p->name + "'");
  }
  for (Parameter* p : params) {
    p->grad.array() *= p->mask.array();
    ++p->step;
    p->m = cfg.beta1 * p->m + (1.0 - cfg.beta1) * p->grad;
    p->v = cfg.beta2 * p->v + (1.0 - cfg.beta2) * p->grad.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
    p->value.array() -= lr * (p->m.array() / bc1) / ((p->v.array() / bc2).sqrt() + cfg.eps);
    p->apply_mask();
  }
}

double lr_schedule(double base, int round_index, double gamma, int tau) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("lr_schedule: gamma must lie in (0,1)");
  if (tau < 1) throw ParameterError("lr_schedule: tau must be >= 1");
  if (round_index < 0) throw ParameterError("lr_schedule: negative round index");
  return base * std::pow(gamma, round_index / tau);
}

Mat xavier_init(Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out, Rng& rng) {
  if (!(fan_in > 0.0 && fan_out > 0.0)) throw ParameterError("xavier_init: fans must be positive");
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  Mat w(rows, cols);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(-bound, bound);
  return w;
}

void zero_grads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace ggl

#include "gihelm/adam.hpp"

#include <cmath>

#include "gihelm/errors.hpp"

namespace gihelm {

double adam_learning_rate(const AdamConfig& cfg, std::size_t step) {
  const double frac = static_cast<double>(step) / static_cast<double>(cfg.total_steps);
  return cfg.lr_initial * std::pow(cfg.lr_final / cfg.lr_initial, frac);
}

AdamState make_adam(std::size_t num_params, const AdamConfig& cfg) {
  if (cfg.total_steps == 0) throw InvalidArgument("adam: total_steps must be positive");
  AdamState s;
  s.cfg = cfg;
  s.m.assign(num_params, 0.0);
  s.v.assign(num_params, 0.0);
  return s;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != state.m.size() || grads.size() != state.m.size()) {
    throw InvalidArgument("adam_step: shape mismatch");
  }
  const auto& c = state.cfg;
  const double lr = adam_learning_rate(c, state.step);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    params[i] -= lr * (state.m[i] / bc1) / (std::sqrt(state.v[i] / bc2) + c.eps);
  }
}

}  // namespace gihelm

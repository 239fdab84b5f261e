#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gihelm {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr_initial = 1e-3;
  double lr_final = 3.4e-4;
  std::size_t total_steps = 1;
};

/// lr_initial * (lr_final / lr_initial)^(t / T).
double adam_learning_rate(const AdamConfig& cfg, std::size_t step);

struct AdamState {
  AdamConfig cfg;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;  // number of updates applied so far
};

AdamState make_adam(std::size_t num_params, const AdamConfig& cfg);

/// One bias-corrected Adam update using the learning rate at the current step.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

}  // namespace gihelm

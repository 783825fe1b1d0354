#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vistrip/tensor.hpp"

namespace vistrip::optim {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moments for a fixed list of parameters.
struct OptimizerState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t t = 0;
};

/// One bias-corrected Adam update, in place. The state is sized on first use
/// and must keep the same parameter shapes afterwards.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, OptimizerState& state,
               double lr, const AdamConfig& cfg = {});

struct Schedule {
  double lr_init = 1e-4;
  double lr_final = 1e-7;
  std::size_t total_steps = 1000;

  void validate() const;
};

/// Cosine annealing from lr_init at step 0 to lr_final at total_steps; clamped after.
double cosine_lr(std::size_t step, const Schedule& s);

/// Scales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_global_norm(std::span<Tensor* const> grads, double max_norm);

}  // namespace vistrip::optim

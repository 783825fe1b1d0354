#include "vistrip/optimizer.hpp"

#include <cmath>
#include <numbers>

namespace vistrip::optim {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, OptimizerState& state,
               double lr, const AdamConfig& cfg) {
  if (params.size() != grads.size())
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                     std::to_string(grads.size()) + " gradients");
  if (state.m.empty() && state.t == 0) {
    for (const Tensor* p : params) {
      state.m.emplace_back(p->shape());
      state.v.emplace_back(p->shape());
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: optimizer state tracks a different parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i]->shape() || params[i]->shape() != state.m[i].shape())
      throw ShapeError("adam_step: parameter " + std::to_string(i) + " has shape " +
                       vistrip::to_string(params[i]->shape()) + " but gradient " +
                       vistrip::to_string(grads[i]->shape()));
  }

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->raw();
    const double* g = grads[i]->raw();
    double* m = state.m[i].raw();
    double* v = state.v[i].raw();
    for (std::size_t j = 0; j < params[i]->size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double mh = m[j] / c1;
      const double vh = v[j] / c2;
      p[j] -= lr * mh / (std::sqrt(vh) + cfg.eps);
    }
  }
}

void Schedule::validate() const {
  if (!(lr_init > lr_final && lr_final > 0.0)) throw ConfigError("schedule needs lr_init > lr_final > 0");
  if (total_steps == 0) throw ConfigError("schedule needs total_steps >= 1");
}

double cosine_lr(std::size_t step, const Schedule& s) {
  if (step >= s.total_steps) return s.lr_final;
  const double x = static_cast<double>(step) / static_cast<double>(s.total_steps);
  return s.lr_final + 0.5 * (s.lr_init - s.lr_final) * (1.0 + std::cos(std::numbers::pi * x));
}

double clip_global_norm(std::span<Tensor* const> grads, double max_norm) {
  double sq = 0.0;
  for (const Tensor* g : grads)
    for (double v : g->data()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (Tensor* g : grads) g->scale_inplace(f);
  }
  return norm;
}

}  // namespace vistrip::optim

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vistrip/params.hpp"

namespace vistrip::verify {

struct GradCheckOptions {
  double h = 1e-5;
  /// Coordinates checked per tensor; tensors smaller than this are checked exhaustively.
  std::size_t samples_per_tensor = 64;
  std::uint64_t seed = 0;
  /// Replacement draws allowed per tensor for stencils that straddle a kink.
  std::size_t max_resamples = 256;
  /// Lower bound on the relative-error denominator. Raise it for objectives whose
  /// true gradient is exactly zero at some coordinates, where difference noise dominates.
  double abs_floor = 1e-8;
};

struct TensorCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t resampled = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  double max_rel_error = 0.0;
  bool passed(double tol) const { return max_rel_error <= tol; }
};

/// Scalar function of the given parameter leaves, built on a fresh tape.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

/// Central differences against tape gradients. Relative error per coordinate
/// is |a - n| / max(|a|, |n|, abs_floor). A coordinate is redrawn when the branch
/// signature of f(x + h) or f(x - h) differs from f(x) (the stencil crosses a
/// kink). Throws NumericError if f is non-finite at any evaluated point.
GradCheckReport finite_diff_check(const ScalarFn& fn, std::vector<std::pair<std::string, Tensor>> params,
                                  const GradCheckOptions& opts = {});

/// Same check over a parameter struct.
template <template <class> class P>
GradCheckReport finite_diff_check(const std::function<Var(Tape&, const P<Var>&)>& fn, const P<Tensor>& params,
                                  const GradCheckOptions& opts = {}) {
  std::vector<std::pair<std::string, Tensor>> flat;
  for_each_param(params, "", [&flat](const std::string& name, const Tensor& t) { flat.emplace_back(name, t); });
  ScalarFn wrapped = [&](Tape& tape, std::span<const Var> leaves) {
    std::size_t i = 0;
    const P<Var> bound = params.template map<Var>([&](const Tensor&) { return leaves[i++]; });
    return fn(tape, bound);
  };
  return finite_diff_check(wrapped, std::move(flat), opts);
}

/// Identity in the forward pass whose recorded adjoint is scaled by `factor`;
/// used to confirm the checker catches a wrong gradient.
Var faulty_identity(Var x, double factor);

}  // namespace vistrip::verify

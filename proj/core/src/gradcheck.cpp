#include "vistrip/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vistrip/random.hpp"

namespace vistrip::verify {

namespace {

struct Eval {
  double value;
  std::uint64_t signature;
};

Eval evaluate(const ScalarFn& fn, const std::vector<std::pair<std::string, Tensor>>& params) {
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& [name, t] : params) leaves.push_back(tape.constant(t));
  const Var out = fn(tape, leaves);
  const double v = out.value().item();
  if (!std::isfinite(v)) throw NumericError("finite_diff_check: function value is not finite");
  return {v, tape.branch_signature()};
}

}  // namespace

GradCheckReport finite_diff_check(const ScalarFn& fn, std::vector<std::pair<std::string, Tensor>> params,
                                  const GradCheckOptions& opts) {
  std::vector<Tensor> analytic;
  std::uint64_t base_sig = 0;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& [name, t] : params) leaves.push_back(tape.leaf(t));
    const Var out = fn(tape, leaves);
    if (!std::isfinite(out.value().item())) throw NumericError("finite_diff_check: function value is not finite");
    base_sig = tape.branch_signature();
    tape.backward(out);
    for (const Var& l : leaves) analytic.push_back(l.grad());
  }

  GradCheckReport rep;
  Rng rng(Rng::mix(opts.seed, 0x67726164));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& t = params[p].second;
    TensorCheck tc;
    tc.name = params[p].first;

    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with our own generator so the sample is platform independent.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const std::size_t want = std::min(opts.samples_per_tensor, t.size());

    std::size_t cursor = 0;
    while (tc.checked < want && cursor < order.size()) {
      const std::size_t idx = order[cursor++];
      const double orig = t[idx];
      t[idx] = orig + opts.h;
      const Eval plus = evaluate(fn, params);
      t[idx] = orig - opts.h;
      const Eval minus = evaluate(fn, params);
      t[idx] = orig;
      if (plus.signature != base_sig || minus.signature != base_sig) {
        if (tc.resampled < opts.max_resamples) {
          ++tc.resampled;
          continue;
        }
      }
      const double numeric = (plus.value - minus.value) / (2.0 * opts.h);
      const double a = analytic[p][idx];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), opts.abs_floor});
      if (tc.checked == 0 || err > tc.max_rel_error) {
        tc.max_rel_error = err;
        tc.worst_index = idx;
        tc.worst_analytic = a;
        tc.worst_numeric = numeric;
      }
      ++tc.checked;
    }
    rep.max_rel_error = std::max(rep.max_rel_error, tc.max_rel_error);
    rep.tensors.push_back(std::move(tc));
  }
  return rep;
}

Var faulty_identity(Var x, double factor) {
  return x.tape()->record(x.value(), {x}, [factor](BackwardContext& ctx) {
    if (Tensor* g = ctx.parent_grad(0)) {
      const Tensor& dy = ctx.out_grad();
      for (std::size_t i = 0; i < dy.size(); ++i) (*g)[i] += factor * dy[i];
    }
  });
}

}  // namespace vistrip::verify

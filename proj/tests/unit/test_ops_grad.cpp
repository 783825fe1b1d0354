// Every differentiable op against central differences, ten seeds each.
#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "vistrip/gradcheck.hpp"
#include "vistrip/ops.hpp"
#include "vistrip/random.hpp"

using namespace vistrip;

namespace {

using Inputs = std::vector<std::pair<std::string, Tensor>>;
using OpFn = std::function<Var(Tape&, std::span<const Var>)>;

// Contracts the op output with fixed random weights so every output entry matters.
double check(const Inputs& inputs, const OpFn& op, std::uint64_t seed, double floor) {
  Tensor probe;
  return verify::finite_diff_check(
             [&](Tape& tape, std::span<const Var> p) {
               const Var y = op(tape, p);
               if (probe.size() != y.value().size()) {
                 Rng r(seed ^ 0xabc);
                 probe = random_normal(y.value().shape(), r);
               }
               return ops::sum(ops::mul(y, tape.constant(probe)));
             },
             inputs, {.seed = seed, .abs_floor = floor})
      .max_rel_error;
}

struct OpCase {
  const char* name;
  std::function<Inputs(Rng&)> make;
  OpFn op;
  double floor = 1e-8;
};

Tensor positive(Shape s, Rng& rng) { return random_uniform(std::move(s), rng, 0.5, 2.0); }

std::vector<OpCase> cases() {
  return {
      {"add", [](Rng& r) { return Inputs{{"a", random_normal({3, 4}, r)}, {"b", random_normal({3, 4}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::add(p[0], p[1]); }},
      {"sub", [](Rng& r) { return Inputs{{"a", random_normal({3, 4}, r)}, {"b", random_normal({3, 4}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::sub(p[0], p[1]); }},
      {"mul", [](Rng& r) { return Inputs{{"a", random_normal({3, 4}, r)}, {"b", random_normal({3, 4}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::mul(p[0], p[1]); }},
      {"scale", [](Rng& r) { return Inputs{{"a", random_normal({5}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::scale(p[0], -1.7); }},
      {"add_scalar", [](Rng& r) { return Inputs{{"a", random_normal({5}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::add_scalar(p[0], 0.3); }},
      {"sqrt", [](Rng& r) { return Inputs{{"a", positive({6}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::sqrt(p[0]); }},
      {"leaky_relu", [](Rng& r) { return Inputs{{"a", random_normal({4, 5}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::leaky_relu(p[0], 0.1); }},
      {"gelu", [](Rng& r) { return Inputs{{"a", random_normal({4, 5}, r, 2.0)}}; },
       [](Tape&, std::span<const Var> p) { return ops::gelu(p[0]); }},
      {"add_bias", [](Rng& r) { return Inputs{{"a", random_normal({2, 3, 4}, r)}, {"b", random_normal({4}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::add_bias(p[0], p[1]); }},
      {"sum", [](Rng& r) { return Inputs{{"a", random_normal({3, 4}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::sum(p[0]); }},
      {"mean", [](Rng& r) { return Inputs{{"a", random_normal({3, 4}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::mean(p[0]); }},
      {"sum_per_leading", [](Rng& r) { return Inputs{{"a", random_normal({3, 2, 4}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::sum_per_leading(p[0]); }},
      {"matmul", [](Rng& r) { return Inputs{{"a", random_normal({3, 5}, r)}, {"b", random_normal({5, 2}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::matmul(p[0], p[1]); }},
      {"linear", [](Rng& r) { return Inputs{{"x", random_normal({2, 3, 4}, r)}, {"w", random_normal({4, 5}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::linear(p[0], p[1]); }},
      {"bmm", [](Rng& r) { return Inputs{{"a", random_normal({2, 3, 4}, r)}, {"b", random_normal({2, 4, 5}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::bmm(p[0], p[1], false); }},
      {"bmm_t", [](Rng& r) { return Inputs{{"a", random_normal({2, 3, 4}, r)}, {"b", random_normal({2, 5, 4}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::bmm(p[0], p[1], true); }},
      {"reshape", [](Rng& r) { return Inputs{{"a", random_normal({2, 6}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::reshape(p[0], {3, 4}); }},
      {"permute", [](Rng& r) { return Inputs{{"a", random_normal({2, 3, 4}, r)}}; },
       [](Tape&, std::span<const Var> p) {
         const std::array<std::size_t, 3> axes{2, 0, 1};
         return ops::permute(p[0], axes);
       }},
      {"slice_last", [](Rng& r) { return Inputs{{"a", random_normal({3, 6}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::slice_last(p[0], 2, 5); }},
      {"concat_last", [](Rng& r) { return Inputs{{"a", random_normal({3, 2}, r)}, {"b", random_normal({3, 4}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::concat_last(p[0], p[1]); }},
      {"upsample", [](Rng& r) { return Inputs{{"a", random_normal({2, 2, 3, 2}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::upsample_nearest(p[0], 2); }},
      {"softmax", [](Rng& r) { return Inputs{{"a", random_normal({3, 5}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::softmax_last_axis(p[0]); }},
      {"layer_norm",
       [](Rng& r) {
         return Inputs{{"x", random_normal({4, 6}, r)}, {"g", random_normal({6}, r)}, {"b", random_normal({6}, r)}};
       },
       [](Tape&, std::span<const Var> p) { return ops::layer_norm_channels(p[0], p[1], p[2]); }},
      {"conv2d",
       [](Rng& r) {
         return Inputs{{"x", random_normal({2, 5, 4, 2}, r)}, {"w", random_normal({3, 3, 2, 3}, r)},
                       {"b", random_normal({3}, r)}};
       },
       [](Tape&, std::span<const Var> p) { return ops::conv2d(p[0], p[1], p[2]); }},
      {"conv2d_stride2",
       [](Rng& r) {
         return Inputs{{"x", random_normal({1, 5, 6, 2}, r)}, {"w", random_normal({3, 3, 2, 2}, r)},
                       {"b", random_normal({2}, r)}};
       },
       [](Tape&, std::span<const Var> p) { return ops::conv2d(p[0], p[1], p[2], {.stride = 2, .pad = {}}); }},
      {"spectral_l1", [](Rng& r) { return Inputs{{"d", random_normal({2, 4, 6, 2}, r)}}; },
       [](Tape&, std::span<const Var> p) { return ops::spectral_l1_per_frame(p[0]); },
       // Purely real bins have an imaginary part that is exactly zero for every input,
       // so some coordinates have a true gradient of zero and only difference noise remains.
       1e-4},
  };
}

}  // namespace

class OpGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(OpGradient, MatchesCentralDifferencesOnTenSeeds) {
  const OpCase c = cases()[GetParam()];
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed * 7919);
    const double err = check(c.make(rng), c.op, seed, c.floor);
    EXPECT_LE(err, 1e-4) << c.name << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::Range<std::size_t>(0, cases().size()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           return std::string(cases()[info.param].name);
                         });

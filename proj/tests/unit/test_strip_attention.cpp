#include <gtest/gtest.h>

#include "vistrip/gradcheck.hpp"
#include "vistrip/ops.hpp"
#include "vistrip/oracle.hpp"
#include "vistrip/strip_attention.hpp"

using namespace vistrip;
using attn::Directions;
using attn::Mechanism;

namespace {

attn::StripAttentionParams params(std::size_t c, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  auto p = attn::init_strip_params(c, m, rng);
  // Non-trivial affine terms so layer norm parameters are exercised.
  for (Tensor* t : {&p.ln1_gamma, &p.ln1_beta, &p.fuse_b, &p.ln2_gamma, &p.ln2_beta, &p.mlp1_b, &p.mlp2_b})
    for (double& v : t->data()) v += 0.3 * rng.normal();
  return p;
}

Tensor permute_columns(const Tensor& x, const std::vector<std::size_t>& perm) {
  const std::size_t T = x.extent(0), H = x.extent(1), W = x.extent(2), C = x.extent(3);
  Tensor out(x.shape());
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t j = 0; j < W; ++j)
        for (std::size_t c = 0; c < C; ++c) out.at({t, y, j, c}) = x.at({t, y, perm[j], c});
  return out;
}

}  // namespace

TEST(StripAttention, ShapeContract) {
  Rng rng(1);
  const auto p = params(8, 2, 2);
  const Tensor x = random_normal({2, 4, 6, 8}, rng);
  for (Mechanism m : {Mechanism::Intra, Mechanism::Inter, Mechanism::Joint})
    EXPECT_EQ(attn::apply_block(x, p, {m, Directions::Both}).shape(), (Shape{2, 4, 6, 8}));
}

TEST(StripAttention, GeometryErrors) {
  Rng rng(1);
  EXPECT_THROW(attn::init_strip_params(7, 1, rng), ConfigError);
  EXPECT_THROW(attn::init_strip_params(8, 3, rng), ConfigError);
  const auto p = params(8, 2, 2);
  EXPECT_THROW(attn::apply_block(Tensor({1, 2, 2, 6}), p, {}), ConfigError);
}

TEST(StripAttention, IntraLeavesOtherFramesBitIdentical) {
  Rng rng(3);
  const auto p = params(8, 2, 4);
  const Tensor x = random_normal({3, 4, 6, 8}, rng);
  Tensor moved = x;
  for (std::size_t i = 0; i < 4 * 6 * 8; ++i) moved[2 * 4 * 6 * 8 + i] += rng.normal();
  const Tensor a = attn::apply_block(x, p, {Mechanism::Intra, Directions::Both});
  const Tensor b = attn::apply_block(moved, p, {Mechanism::Intra, Directions::Both});
  EXPECT_TRUE(bit_equal(frame(a, 0), frame(b, 0)));
  EXPECT_TRUE(bit_equal(frame(a, 1), frame(b, 1)));
  EXPECT_FALSE(bit_equal(frame(a, 2), frame(b, 2)));
}

TEST(StripAttention, InterWithOneFrameReturnsValues) {
  Rng rng(5);
  const auto p = params(8, 2, 6);
  const Tensor x = random_normal({1, 4, 6, 8}, rng);
  attn::StripTrace trace;
  attn::apply_block(x, p, {Mechanism::Inter, Directions::Both}, &trace);

  Tape tape;
  const auto pv = bind_constant(tape, p);
  const Var n = ops::layer_norm_channels(tape.constant(x), pv.ln1_gamma, pv.ln1_beta);
  const Tensor vh = ops::linear(ops::slice_last(n, 0, 4), pv.v_h).value();
  const Tensor vv = ops::linear(ops::slice_last(n, 4, 8), pv.v_v).value();
  EXPECT_TRUE(bit_equal(trace.attended_h, vh));
  EXPECT_TRUE(bit_equal(trace.attended_v, vv));
}

TEST(StripAttention, JointWithOneFrameMatchesIntra) {
  Rng rng(7);
  const auto p = params(8, 4, 8);
  const Tensor x = random_normal({1, 5, 3, 8}, rng);
  attn::StripTrace intra, joint;
  attn::apply_block(x, p, {Mechanism::Intra, Directions::Both}, &intra);
  attn::apply_block(x, p, {Mechanism::Joint, Directions::Both}, &joint);
  EXPECT_TRUE(bit_equal(intra.attended_h, joint.attended_h));
  EXPECT_TRUE(bit_equal(intra.attended_v, joint.attended_v));
}

TEST(StripAttention, MatchesMaskedOracle) {
  Rng rng(9);
  for (Mechanism m : {Mechanism::Intra, Mechanism::Inter, Mechanism::Joint}) {
    const auto p = params(8, 2, 10);
    const Tensor x = random_normal({3, 4, 6, 8}, rng);
    attn::StripTrace trace;
    attn::apply_block(x, p, {m, Directions::Both}, &trace);
    const auto o = verify::oracle_attended_features(x, p, m);
    EXPECT_LE(max_abs_diff(trace.attended_h, o.attended_h), 1e-9) << attn::to_string(m);
    EXPECT_LE(max_abs_diff(trace.attended_v, o.attended_v), 1e-9) << attn::to_string(m);
  }
}

TEST(StripAttention, AttentionRowsSumToOne) {
  Rng rng(11);
  const auto p = params(8, 2, 12);
  const Tensor x = random_normal({2, 5, 4, 8}, rng, 3.0);
  for (Mechanism m : {Mechanism::Intra, Mechanism::Inter, Mechanism::Joint}) {
    attn::StripTrace trace;
    trace.keep_maps = true;
    attn::apply_block(x, p, {m, Directions::Both}, &trace);
    ASSERT_EQ(trace.maps.size(), 2u);
    for (const Tensor& a : trace.maps) {
      const std::size_t n = a.extent(2);
      for (std::size_t r = 0; r < a.size() / n; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += a[r * n + j];
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
    }
  }
}

TEST(StripAttention, DisabledBranchFeedsZeros) {
  Rng rng(13);
  const auto p = params(8, 2, 14);
  const Tensor x = random_normal({2, 4, 4, 8}, rng);
  attn::StripTrace h_only, v_only;
  attn::apply_block(x, p, {Mechanism::Intra, Directions::Horizontal}, &h_only);
  attn::apply_block(x, p, {Mechanism::Intra, Directions::Vertical}, &v_only);
  for (double v : h_only.attended_v.data()) EXPECT_EQ(v, 0.0);
  for (double v : v_only.attended_h.data()) EXPECT_EQ(v, 0.0);
  EXPECT_GT(max_abs_diff(h_only.attended_h, Tensor(h_only.attended_h.shape())), 0.0);
}

TEST(StripAttention, HorizontalOnlyIsColumnPermutationEquivariant) {
  Rng rng(15);
  const auto p = params(8, 2, 16);
  const Tensor x = random_normal({2, 4, 6, 8}, rng);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  for (Mechanism m : {Mechanism::Intra, Mechanism::Inter, Mechanism::Joint}) {
    attn::StripTrace a, b;
    attn::apply_block(x, p, {m, Directions::Horizontal}, &a);
    attn::apply_block(permute_columns(x, perm), p, {m, Directions::Horizontal}, &b);
    EXPECT_LE(max_abs_diff(b.attended_h, permute_columns(a.attended_h, perm)), 1e-12) << attn::to_string(m);
  }
}

TEST(StripAttention, InterIsFrameEquivariantAtAttendedFeatures) {
  Rng rng(17);
  const auto p = params(8, 2, 18);
  const Tensor x = random_normal({3, 4, 4, 8}, rng);
  const std::vector<Tensor> f{frame(x, 2), frame(x, 0), frame(x, 1)};
  attn::StripTrace a, b;
  attn::apply_block(x, p, {Mechanism::Inter, Directions::Both}, &a);
  attn::apply_block(stack_frames(f), p, {Mechanism::Inter, Directions::Both}, &b);
  const std::vector<Tensor> expect{frame(a.attended_h, 2), frame(a.attended_h, 0), frame(a.attended_h, 1)};
  EXPECT_LE(max_abs_diff(b.attended_h, stack_frames(expect)), 1e-12);
}

TEST(StripAttention, ParameterCountFormula) {
  for (std::size_t c : {4u, 8u, 32u}) {
    Rng rng(1);
    EXPECT_EQ(count_scalars(attn::init_strip_params(c, 1, rng)), attn::strip_param_count(c));
    EXPECT_EQ(attn::strip_param_count(c) * 2, 13 * c * c + 16 * c);
  }
}

class StripGradient : public ::testing::TestWithParam<Mechanism> {};

TEST_P(StripGradient, AllParametersMatchFiniteDifferences) {
  Rng rng(19);
  const auto p = params(8, 2, 20);
  const Tensor x = random_normal({2, 3, 4, 8}, rng);
  const Tensor probe = random_normal({2, 3, 4, 8}, rng);
  const Mechanism m = GetParam();
  const auto rep = verify::finite_diff_check<attn::StripAttentionParamsT>(
      [&](Tape& tape, const attn::StripAttentionVars& v) {
        const Var y = attn::strip_attention_block(tape.constant(x), v, {m, Directions::Both});
        return ops::sum(ops::mul(y, tape.constant(probe)));
      },
      p);
  for (const auto& t : rep.tensors) EXPECT_LE(t.max_rel_error, 1e-4) << t.name;
  EXPECT_EQ(rep.tensors.size(), 16u);
}

INSTANTIATE_TEST_SUITE_P(Mechanisms, StripGradient,
                         ::testing::Values(Mechanism::Intra, Mechanism::Inter, Mechanism::Joint),
                         [](const auto& info) { return std::string(attn::to_string(info.param)); });

TEST(StripAttention, InputGradientMatchesFiniteDifferences) {
  Rng rng(21);
  const auto p = params(4, 1, 22);
  const Tensor probe = random_normal({2, 3, 3, 4}, rng);
  const auto rep = verify::finite_diff_check(
      [&](Tape& tape, std::span<const Var> in) {
        const auto pv = bind_constant(tape, p);
        const Var y = attn::inter_sa_block(in[0], pv);
        return ops::sum(ops::mul(y, tape.constant(probe)));
      },
      {{"x", random_normal({2, 3, 3, 4}, rng)}});
  EXPECT_LE(rep.max_rel_error, 1e-4);
}

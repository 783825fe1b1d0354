#include <gtest/gtest.h>

#include <cmath>

#include "vistrip/oracle.hpp"
#include "vistrip/random.hpp"

using namespace vistrip;
using attn::Mechanism;

namespace {

std::size_t allowed_pairs(const verify::AttentionMask& m) {
  std::size_t n = 0;
  for (std::size_t q = 0; q < m.queries(); ++q)
    for (std::size_t k = 0; k < m.keys(); ++k) n += m.allowed(q, k);
  return n;
}

}  // namespace

TEST(Oracle, TokenListing) {
  const auto toks = verify::all_strip_tokens(2, 3, 4);
  ASSERT_EQ(toks.size(), 2u * (3 + 4));
  EXPECT_EQ(toks[0].direction, attn::Branch::Horizontal);
  EXPECT_EQ(toks[3].frame, 1u);
  EXPECT_EQ(toks[6].direction, attn::Branch::Vertical);
  EXPECT_EQ(toks[6].frame, 0u);
  EXPECT_EQ(toks[13].index, 3u);
}

TEST(Oracle, MaskPairCountsMatchComplexity) {
  const std::size_t T = 3, H = 4, W = 6;
  const auto toks = verify::all_strip_tokens(T, H, W);
  EXPECT_EQ(allowed_pairs(verify::AttentionMask::for_mechanism(Mechanism::Intra, toks)), T * (H * H + W * W));
  EXPECT_EQ(allowed_pairs(verify::AttentionMask::for_mechanism(Mechanism::Inter, toks)), (H + W) * T * T);
  EXPECT_EQ(allowed_pairs(verify::AttentionMask::for_mechanism(Mechanism::Joint, toks)), T * T * (H * H + W * W));
}

TEST(MaskedAttention, FullMaskIsPlainSoftmaxAttention) {
  Rng rng(1);
  const Tensor q = random_normal({3, 4}, rng), k = random_normal({5, 4}, rng), v = random_normal({5, 2}, rng);
  const Tensor out = verify::masked_full_attention(q, k, v, verify::AttentionMask(3, 5, true), 0.5);
  for (std::size_t i = 0; i < 3; ++i) {
    double w[5], z = 0;
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0;
      for (std::size_t d = 0; d < 4; ++d) s += q.at({i, d}) * k.at({j, d});
      w[j] = std::exp(0.5 * s);
      z += w[j];
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double e = 0;
      for (std::size_t j = 0; j < 5; ++j) e += w[j] / z * v.at({j, c});
      EXPECT_NEAR(out.at({i, c}), e, 1e-12);
    }
  }
}

TEST(MaskedAttention, SingleAllowedKeyCopiesItsValue) {
  Rng rng(2);
  const Tensor q = random_normal({2, 3}, rng), k = random_normal({4, 3}, rng), v = random_normal({4, 2}, rng);
  verify::AttentionMask m(2, 4);
  m.set(0, 2, true);
  m.set(1, 0, true);
  const Tensor out = verify::masked_full_attention(q, k, v, m, 1.0);
  EXPECT_EQ(out.at({0, 1}), v.at({2, 1}));
  EXPECT_EQ(out.at({1, 0}), v.at({0, 0}));
}

TEST(MaskedAttention, EmptyRowIsRejected) {
  verify::AttentionMask m(2, 2);
  m.set(0, 0, true);
  EXPECT_THROW(verify::masked_full_attention(Tensor({2, 1}), Tensor({2, 1}), Tensor({2, 1}), m, 1.0), ConfigError);
}

TEST(OracleFeatures, WrongScaleRuleIsDetected) {
  Rng rng(3);
  auto p = attn::init_strip_params(8, 2, rng);
  for (Tensor* t : {&p.q_h, &p.k_h, &p.q_v, &p.k_v})
    for (double& v : t->data()) v *= 4.0;
  const Tensor x = random_normal({2, 4, 4, 8}, rng);
  attn::StripTrace trace;
  attn::apply_block(x, p, {Mechanism::Intra, attn::Directions::Both}, &trace);
  const auto good = verify::oracle_attended_features(x, p, Mechanism::Intra);
  const auto bad = verify::oracle_attended_features(x, p, Mechanism::Intra, verify::ScaleRule::HeadDim);
  EXPECT_LE(max_abs_diff(trace.attended_h, good.attended_h), 1e-9);
  EXPECT_GT(max_abs_diff(trace.attended_h, bad.attended_h), 1e-3);
}

#include <gtest/gtest.h>

#include "vistrip/augment.hpp"
#include "vistrip/random.hpp"

using namespace vistrip;

namespace {

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST(Augment, RotateQuarterTurnByHand) {
  // 2x3 single-channel frame, rotated counter-clockwise.
  const Tensor v({1, 2, 3, 1}, {1, 2, 3, 4, 5, 6});
  const Tensor r = augment::rotate90(v, 1);
  EXPECT_EQ(r.shape(), (Shape{1, 3, 2, 1}));
  EXPECT_EQ(values(r), (std::vector<double>{3, 6, 2, 5, 1, 4}));
}

TEST(Augment, FlipByHand) {
  const Tensor v({1, 1, 3, 1}, {1, 2, 3});
  EXPECT_EQ(values(augment::flip_horizontal(v)), (std::vector<double>{3, 2, 1}));
}

TEST(Augment, GroupIdentities) {
  Rng rng(1);
  const Tensor v = random_normal({2, 4, 5, 3}, rng);
  EXPECT_TRUE(bit_equal(augment::flip_horizontal(augment::flip_horizontal(v)), v));
  EXPECT_TRUE(bit_equal(augment::rotate90(v, 4), v));
  EXPECT_TRUE(bit_equal(augment::rotate90(augment::rotate90(v, 3), 1), v));
  EXPECT_TRUE(bit_equal(augment::rotate90(v, 0), v));
}

TEST(Augment, CropSelectsWindow) {
  Rng rng(2);
  const Tensor v = random_normal({2, 6, 7, 3}, rng);
  const Tensor c = augment::crop(v, 1, 2, 3, 4);
  EXPECT_EQ(c.shape(), (Shape{2, 3, 4, 3}));
  EXPECT_EQ(c.at({1, 2, 3, 1}), v.at({1, 3, 5, 1}));
  EXPECT_THROW(augment::crop(v, 4, 0, 3, 4), ShapeError);
  EXPECT_THROW(augment::random_transform(6, 7, 8, 4, 3), ShapeError);
}

TEST(Augment, RandomTransformsAreDeterministicAndFit) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto a = augment::random_transform(20, 24, 16, 16, s);
    const auto b = augment::random_transform(20, 24, 16, 16, s);
    EXPECT_EQ(a.y0, b.y0);
    EXPECT_EQ(a.quarter_turns, b.quarter_turns);
    EXPECT_LE(a.y0 + 16, 20u);
    EXPECT_LE(a.x0 + 16, 24u);
    const auto r = augment::random_transform(20, 24, 16, 8, s);
    EXPECT_EQ(r.quarter_turns % 2, 0u);
  }
}

TEST(Augment, PairSharesTransform) {
  Rng rng(3);
  const Tensor clean = random_normal({2, 12, 12, 3}, rng);
  Tensor degraded = clean;
  for (double& v : degraded.data()) v *= 2.0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto out = augment::augment_pair({clean, degraded}, 8, 8, s);
    ASSERT_EQ(out.clean.shape(), (Shape{2, 8, 8, 3}));
    for (std::size_t i = 0; i < out.clean.size(); ++i) EXPECT_EQ(out.degraded[i], 2.0 * out.clean[i]);
  }
}

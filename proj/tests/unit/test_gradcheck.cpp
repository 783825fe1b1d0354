#include <gtest/gtest.h>

#include <cmath>

#include "vistrip/gradcheck.hpp"
#include "vistrip/ops.hpp"
#include "vistrip/random.hpp"

using namespace vistrip;

TEST(GradCheck, PassesCorrectGradient) {
  Rng rng(1);
  const auto rep = verify::finite_diff_check(
      [](Tape&, std::span<const Var> p) { return ops::sum(ops::gelu(ops::mul(p[0], p[0]))); },
      {{"x", random_normal({4, 3}, rng)}});
  ASSERT_EQ(rep.tensors.size(), 1u);
  EXPECT_EQ(rep.tensors[0].checked, 12u);
  EXPECT_TRUE(rep.passed(1e-6));
}

TEST(GradCheck, CatchesScaledAdjoint) {
  Rng rng(2);
  for (double factor : {1.01, 0.5, -1.0}) {
    const auto rep = verify::finite_diff_check(
        [factor](Tape&, std::span<const Var> p) {
          return ops::sum(ops::mul(verify::faulty_identity(p[0], factor), p[0]));
        },
        {{"x", random_normal({5}, rng)}});
    EXPECT_FALSE(rep.passed(1e-4)) << factor;
  }
}

TEST(GradCheck, FaultyIdentityWithUnitFactorIsExact) {
  Rng rng(3);
  const auto rep = verify::finite_diff_check(
      [](Tape&, std::span<const Var> p) { return ops::sum(ops::mul(verify::faulty_identity(p[0], 1.0), p[0])); },
      {{"x", random_normal({5}, rng)}});
  EXPECT_TRUE(rep.passed(1e-6));
}

TEST(GradCheck, ResamplesAcrossKinks) {
  // Values within h of the leaky kink would give a one-sided difference quotient.
  Tensor x({6}, {1e-7, -2e-7, 0.3, -0.4, 5e-8, 0.9});
  const auto rep = verify::finite_diff_check(
      [](Tape&, std::span<const Var> p) { return ops::sum(ops::leaky_relu(p[0], 0.1)); }, {{"x", x}},
      {.h = 1e-5, .samples_per_tensor = 6, .seed = 0, .max_resamples = 256});
  EXPECT_EQ(rep.tensors[0].resampled, 3u);
  EXPECT_EQ(rep.tensors[0].checked, 3u);
  EXPECT_TRUE(rep.passed(1e-8));
}

TEST(GradCheck, SamplesLargeTensors) {
  Rng rng(4);
  const auto rep = verify::finite_diff_check(
      [](Tape&, std::span<const Var> p) { return ops::sum(ops::mul(p[0], p[0])); },
      {{"x", random_normal({100, 10}, rng)}}, {.h = 1e-5, .samples_per_tensor = 20, .seed = 4, .max_resamples = 0});
  EXPECT_EQ(rep.tensors[0].checked, 20u);
}

TEST(GradCheck, NonFiniteObjectiveThrows) {
  EXPECT_THROW(verify::finite_diff_check(
                   [](Tape&, std::span<const Var> p) { return ops::sum(ops::sqrt(p[0])); },
                   {{"x", Tensor({2}, {-1.0, 1.0})}}),
               NumericError);
}

#include <gtest/gtest.h>

#include <cmath>

#include "vistrip/optimizer.hpp"

using namespace vistrip;

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor p({3}, {1.0, -2.0, 0.5});
  const Tensor g({3}, {0.3, -4.0, 1e-3});
  Tensor* params[] = {&p};
  const Tensor* grads[] = {&g};
  optim::OptimizerState st;
  optim::adam_step(params, grads, st, 0.1);
  // m_hat = g, v_hat = g^2 after bias correction.
  EXPECT_NEAR(p[0], 1.0 - 0.1 * 0.3 / (0.3 + 1e-8), 1e-15);
  EXPECT_NEAR(p[1], -2.0 + 0.1 * 4.0 / (4.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p[2], 0.5 - 0.1 * 1e-3 / (1e-3 + 1e-8), 1e-15);
  EXPECT_EQ(st.t, 1u);
}

TEST(Adam, MinimisesQuadratic) {
  Tensor p({2}, {3.0, -5.0});
  optim::OptimizerState st;
  for (int i = 0; i < 2000; ++i) {
    Tensor g({2}, {2.0 * (p[0] - 1.0), 2.0 * (p[1] + 2.0)});
    Tensor* params[] = {&p};
    const Tensor* grads[] = {&g};
    optim::adam_step(params, grads, st, 0.05);
  }
  EXPECT_NEAR(p[0], 1.0, 1e-3);
  EXPECT_NEAR(p[1], -2.0, 1e-3);
}

TEST(Adam, RejectsMismatchedInputs) {
  Tensor p({2}), q({3});
  const Tensor g({3});
  optim::OptimizerState st;
  Tensor* one[] = {&p};
  const Tensor* bad[] = {&g};
  EXPECT_THROW(optim::adam_step(one, bad, st, 0.1), ShapeError);
  Tensor* two[] = {&p, &q};
  EXPECT_THROW(optim::adam_step(two, bad, st, 0.1), ShapeError);
}

TEST(CosineLr, EndpointsMidpointAndClamp) {
  const optim::Schedule s{1e-4, 1e-7, 1000};
  EXPECT_EQ(optim::cosine_lr(0, s), 1e-4);
  EXPECT_NEAR(optim::cosine_lr(500, s), (1e-4 + 1e-7) / 2.0, 1e-18);
  EXPECT_EQ(optim::cosine_lr(1000, s), 1e-7);
  EXPECT_EQ(optim::cosine_lr(5000, s), 1e-7);
  double prev = 1.0;
  for (std::size_t i = 0; i <= 1000; i += 50) {
    const double lr = optim::cosine_lr(i, s);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
  EXPECT_THROW((optim::Schedule{1e-4, 1e-7, 0}).validate(), ConfigError);
  EXPECT_THROW((optim::Schedule{1e-7, 1e-4, 10}).validate(), ConfigError);
}

TEST(ClipGlobalNorm, ScalesOnlyAboveThreshold) {
  Tensor a({1}, {3.0}), b({1}, {4.0});
  Tensor* gs[] = {&a, &b};
  EXPECT_EQ(optim::clip_global_norm(gs, 1.0), 5.0);
  EXPECT_NEAR(a[0], 0.6, 1e-15);
  EXPECT_NEAR(b[0], 0.8, 1e-15);
  EXPECT_NEAR(optim::clip_global_norm(gs, 2.0), 1.0, 1e-15);
  EXPECT_NEAR(a[0], 0.6, 1e-15);
}

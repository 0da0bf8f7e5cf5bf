// Copyright 2026 The pitchaccent Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pitchaccent/nn/adam.hpp"
#include "pitchaccent/nn/checkpoint.hpp"
#include "pitchaccent/nn/grad_check.hpp"
#include "pitchaccent/nn/layers.hpp"
#include "reference_ops.hpp"

namespace pitchaccent::nn {
namespace {

using testing::fill_uniform;

TEST(Conv2dTest, FullExtentKernelSumsInput) {
  Tensor<double> in({1, 6, 6});
  std::mt19937_64 rng(1);
  fill_uniform(in, rng);
  ConvLayerParams<double> p(1, 1, 6, 6, {1, 1});
  p.kernels.fill(1.0);
  const auto out = conv2d(in, p);
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
  double sum = 0.0;
  for (double v : in.values()) sum += v;
  EXPECT_NEAR(out[0], sum, 1e-12);
}

TEST(Conv2dTest, OutputLengthFollowsStride) {
  EXPECT_EQ(conv_output_length(50, 6, 4), 12u);
  Tensor<double> in({1, 50, 7});
  ConvLayerParams<double> p(3, 1, 6, 7, {4, 1});
  EXPECT_EQ(conv2d(in, p).shape(), (Shape{3, 12, 1}));
}

TEST(Conv2dTest, KernelLargerThanInputThrows) {
  Tensor<double> in({1, 4, 7});
  ConvLayerParams<double> p(1, 1, 6, 7, {1, 1});
  EXPECT_THROW(conv2d(in, p), Error);
}

TEST(Conv2dTest, MatchesNaiveReference) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t groups = trial % 3 == 0 ? 2 : 1;
    const std::size_t cin = 2 * (1 + trial % 2), cout = 2 * (1 + trial % 3);
    const std::size_t h = 9 + trial % 5, w = 5 + trial % 3;
    const std::size_t kh = 1 + trial % 4, kw = 1 + trial % 3;
    ConvLayerParams<double> p(cout, cin, kh, kw, {1 + trial % 3u, 1 + trial % 2u}, groups);
    Tensor<double> in({cin, h, w});
    fill_uniform(in, rng);
    fill_uniform(p.kernels, rng);
    fill_uniform(p.bias, rng);
    const auto fast = conv2d(in, p);
    const auto slow = testing::naive_conv2d(in, p);
    ASSERT_EQ(fast.shape(), slow.shape());
    for (std::size_t i = 0; i < fast.size(); ++i) ASSERT_NEAR(fast[i], slow[i], 1e-10) << "trial " << trial;
  }
}

TEST(Conv2dTest, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  ConvLayerParams<double> p(3, 2, 3, 2, {2, 1});
  Tensor<double> in({2, 9, 4});
  fill_uniform(in, rng);
  fill_uniform(p.kernels, rng);
  fill_uniform(p.bias, rng);
  const auto out = conv2d(in, p);
  Tensor<double> weights(out.shape());
  fill_uniform(weights, rng);
  // loss = sum(out * weights), so d loss / d out = weights.
  auto loss = [&] {
    const auto o = conv2d(in, p);
    double acc = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) acc += o[i] * weights[i];
    return acc;
  };
  ConvLayerParams<double> grads = p;
  grads.kernels.zero();
  grads.bias.zero();
  Tensor<double> grad_in;
  conv2d_backward(in, p, weights, grads, &grad_in);
  std::vector<Tensor<double>*> params{&p.kernels, &p.bias, &in};
  std::vector<const Tensor<double>*> analytic{&grads.kernels, &grads.bias, &grad_in};
  const auto r = grad_check(loss, params, analytic, {.samples = 1000});
  EXPECT_LT(r.max_relative_error, 1e-7);
}

TEST(MaxPoolTest, ChannelMaximum) {
  Tensor<double> in({1, 3, 1});
  in[0] = 1;
  in[1] = 3;
  in[2] = 2;
  const auto r = maxpool_over_time(in);
  EXPECT_EQ(r.output[0], 3.0);
  EXPECT_EQ(r.argmax[0], 1u);
}

TEST(MaxPoolTest, TiesRouteGradientToEarliest) {
  Tensor<double> in({1, 4, 1}, 2.5);
  const auto r = maxpool_over_time(in);
  EXPECT_EQ(r.output[0], 2.5);
  Tensor<double> g({1}, 1.0);
  const auto gi = maxpool_over_time_backward(in.shape(), r.argmax, g);
  EXPECT_EQ(gi[0], 1.0);
  EXPECT_EQ(gi[1] + gi[2] + gi[3], 0.0);
}

TEST(MaxPoolTest, MatchesDirectMaxOnRandomMaps) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor<double> in({100, 12, 1});
    fill_uniform(in, rng);
    const auto r = maxpool_over_time(in);
    const auto ref = testing::naive_maxpool(in);
    ASSERT_EQ(r.output.size(), 100u);
    for (std::size_t c = 0; c < 100; ++c) ASSERT_NEAR(r.output[c], ref[c], 1e-10);
  }
}

TEST(DenseTest, IdentityWeightsPassInputThrough) {
  DenseLayerParams<double> p(3, 3);
  for (std::size_t i = 0; i < 3; ++i) p.weights.at(i, i) = 1.0;
  Tensor<double> x({3});
  x[0] = -1;
  x[1] = 2;
  x[2] = 0.5;
  EXPECT_EQ(dense(x, p, Activation::kIdentity), x);
}

TEST(DenseTest, ReluClampsNegatives) {
  DenseLayerParams<double> p(2, 2);
  p.weights.at(0, 0) = p.weights.at(1, 1) = 1.0;
  Tensor<double> x({2});
  x[0] = -1;
  x[1] = 2;
  const auto y = dense(x, p, Activation::kRelu);
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 2.0);
}

TEST(DenseTest, DimensionMismatchThrows) {
  DenseLayerParams<double> p(2, 3);
  EXPECT_THROW(dense(Tensor<double>({4}), p, Activation::kIdentity), Error);
}

TEST(DenseTest, MatchesMatrixVectorOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t in = 1 + trial % 17, out = 1 + trial % 7;
    DenseLayerParams<double> p(out, in);
    Tensor<double> x({in});
    fill_uniform(p.weights, rng);
    fill_uniform(p.bias, rng);
    fill_uniform(x, rng);
    const auto act = trial % 2 ? Activation::kRelu : Activation::kIdentity;
    const auto y = dense(x, p, act);
    const auto ref = testing::naive_dense(x, p, act);
    for (std::size_t o = 0; o < out; ++o) ASSERT_NEAR(y[o], ref[o], 1e-12);
  }
}

TEST(DenseTest, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  DenseLayerParams<double> p(4, 6);
  Tensor<double> x({6});
  fill_uniform(p.weights, rng);
  fill_uniform(p.bias, rng);
  fill_uniform(x, rng);
  Tensor<double> weights({4});
  fill_uniform(weights, rng);
  auto loss = [&] {
    const auto y = dense(x, p, Activation::kRelu);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += y[i] * weights[i];
    return acc;
  };
  DenseLayerParams<double> grads(4, 6);
  Tensor<double> gx;
  dense_backward(x, dense(x, p, Activation::kRelu), p, Activation::kRelu, weights, grads, &gx);
  std::vector<Tensor<double>*> params{&p.weights, &p.bias, &x};
  std::vector<const Tensor<double>*> analytic{&grads.weights, &grads.bias, &gx};
  EXPECT_LT(grad_check(loss, params, analytic).max_relative_error, 1e-7);
}

TEST(DropoutTest, ZeroRateIsIdentity) {
  std::mt19937_64 rng(3);
  Tensor<double> x({50});
  fill_uniform(x, rng);
  EXPECT_EQ(dropout(x, 0.0, Mode::kTrain, rng).output, x);
  EXPECT_EQ(dropout(x, 0.0, Mode::kEval, rng).output, x);
}

TEST(DropoutTest, EvalModeIsIdentity) {
  std::mt19937_64 rng(3);
  Tensor<double> x({50});
  fill_uniform(x, rng);
  EXPECT_EQ(dropout(x, 0.8, Mode::kEval, rng).output, x);
}

TEST(DropoutTest, EmpiricalRateAndScale) {
  std::mt19937_64 rng(12345);
  Tensor<double> x({100000}, 1.0);
  const auto r = dropout(x, 0.5, Mode::kTrain, rng);
  std::size_t zeros = 0;
  double survivor_sum = 0.0;
  for (double v : r.output.values()) {
    if (v == 0.0) {
      ++zeros;
    } else {
      survivor_sum += v;
    }
  }
  const double zero_rate = static_cast<double>(zeros) / 1e5;
  EXPECT_NEAR(zero_rate, 0.5, 0.01);
  EXPECT_NEAR(survivor_sum / static_cast<double>(100000 - zeros), 2.0, 0.05);
}

TEST(DropoutTest, SameSeedSameMask) {
  Tensor<double> x({1000}, 1.0);
  std::mt19937_64 a(99), b(99);
  EXPECT_EQ(dropout(x, 0.2, Mode::kTrain, a).mask, dropout(x, 0.2, Mode::kTrain, b).mask);
}

TEST(DropoutTest, RejectsRateOfOne) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(dropout(Tensor<double>({3}), 1.0, Mode::kTrain, rng), Error);
}

TEST(SoftmaxTest, UniformLogitsGiveLn2) {
  Tensor<double> logits({2});
  for (std::size_t gold : {0u, 1u}) EXPECT_NEAR(softmax_xent(logits, gold).loss, std::log(2.0), 1e-15);
}

TEST(SoftmaxTest, SumsToOneAndShiftInvariant) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> z{20 * uniform01(rng) - 10, 20 * uniform01(rng) - 10};
    const auto p = softmax<double>(z);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
    const double c = 100 * uniform01(rng) - 50;
    std::vector<double> shifted{z[0] + c, z[1] + c};
    const auto q = softmax<double>(shifted);
    EXPECT_NEAR(p[0], q[0], 1e-12);
    EXPECT_NEAR(p[1], q[1], 1e-12);
  }
}

TEST(SoftmaxTest, LargeLogitsStayFinite) {
  Tensor<double> logits({2});
  logits[0] = 1000;
  logits[1] = -1000;
  const auto r = softmax_xent(logits, 1);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, 2000.0, 1e-9);
}

TEST(SoftmaxXentL2Test, ZeroLambdaIsPureCrossEntropy) {
  std::mt19937_64 rng(8);
  Tensor<double> logits({2});
  fill_uniform(logits, rng);
  Tensor<double> w({3, 4});
  fill_uniform(w, rng);
  const Tensor<double>* ws[] = {&w};
  const auto r = softmax_xent_l2<double>(logits, 1, ws, 0.0);
  EXPECT_EQ(r.loss, softmax_xent(logits, 1).loss);
  EXPECT_EQ(r.loss, r.data_loss);
}

TEST(SoftmaxXentL2Test, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  Tensor<double> logits({2});
  fill_uniform(logits, rng);
  Tensor<double> w({5, 3});
  fill_uniform(w, rng);
  const double lambda = 0.03;
  const Tensor<double>* ws[] = {&w};
  auto loss = [&] { return softmax_xent_l2<double>(logits, 0, ws, lambda).loss; };
  const auto r = softmax_xent_l2<double>(logits, 0, ws, lambda);
  std::vector<Tensor<double>*> params{&logits, &w};
  std::vector<const Tensor<double>*> analytic{&r.grad_logits, &r.weight_grads[0]};
  EXPECT_LT(grad_check(loss, params, analytic).max_relative_error, 1e-4);
}

TEST(AdamTest, ZeroGradientLeavesParamsUnchanged) {
  Tensor<double> p({4}, 0.75);
  Tensor<double> g({4});
  AdamState<double> state;
  Tensor<double>* ps[] = {&p};
  const Tensor<double>* gs[] = {&g};
  adam_step<double>(ps, gs, state);
  EXPECT_EQ(p, Tensor<double>({4}, 0.75));
  EXPECT_EQ(state.step_count, 1);
}

TEST(AdamTest, SingleStepClosedForm) {
  // m_hat = v_hat = 1 after one step with g = 1, so the step is lr / (1 + eps).
  Tensor<double> p({1}, 0.0);
  Tensor<double> g({1}, 1.0);
  AdamState<double> state;
  Tensor<double>* ps[] = {&p};
  const Tensor<double>* gs[] = {&g};
  adam_step<double>(ps, gs, state);
  EXPECT_NEAR(p[0], -0.001 / (1.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p[0], -0.000999995, 1e-8);
}

TEST(AdamTest, ConstantGradientStepsDoNotGrow) {
  Tensor<double> p({1}, 0.0);
  Tensor<double> g({1}, 1.0);
  AdamState<double> state;
  Tensor<double>* ps[] = {&p};
  const Tensor<double>* gs[] = {&g};
  adam_step<double>(ps, gs, state);
  const double d1 = p[0];
  adam_step<double>(ps, gs, state);
  const double d2 = p[0] - d1;
  EXPECT_LE(std::abs(d2), std::abs(d1) + 1e-9);
}

TEST(GradCheckTest, LinearModelIsExact) {
  std::mt19937_64 rng(13);
  Tensor<double> w({30, 10});
  Tensor<double> x({10});
  fill_uniform(w, rng);
  fill_uniform(x, rng);
  auto loss = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < 30; ++i) {
      for (std::size_t j = 0; j < 10; ++j) acc += (i + 1.0) * w.at(i, j) * x[j];
    }
    return acc;
  };
  Tensor<double> g({30, 10});
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 10; ++j) g.at(i, j) = (i + 1.0) * x[j];
  }
  Tensor<double>* ps[] = {&w};
  const Tensor<double>* gs[] = {&g};
  const auto r = grad_check(loss, ps, gs);
  EXPECT_EQ(r.checked, 200u);
  // Exact up to cancellation: ~1e-14 / (2 * 1e-5) absolute, divided by gradients as small as ~1e-2.
  EXPECT_LT(r.max_relative_error, 1e-6);
}

TEST(GradCheckTest, CorruptedGradientIsDetected) {
  Tensor<double> w({50}, 0.3);
  auto loss = [&] {
    double acc = 0.0;
    for (double v : w.values()) acc += v * v;
    return acc;
  };
  Tensor<double> g({50}, 0.6);
  g[17] *= 1.5;
  Tensor<double>* ps[] = {&w};
  const Tensor<double>* gs[] = {&g};
  EXPECT_GT(grad_check(loss, ps, gs).max_relative_error, 1e-2);
}

TEST(CheckpointTest, TextRoundTripIsExact) {
  std::mt19937_64 rng(17);
  Checkpoint c;
  c.seed = 42;
  c.config_hash = "deadbeef";
  Tensor<double> a({2, 3, 4});
  fill_uniform(a, rng);
  c.tensors.push_back({"a", a});
  c.tensors.push_back({"b", Tensor<double>({1}, -1.0 / 3.0)});
  std::stringstream ss;
  write_checkpoint(ss, c);
  const auto back = read_checkpoint(ss);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.config_hash, "deadbeef");
  ASSERT_EQ(back.tensors.size(), 2u);
  EXPECT_EQ(back.tensors[0].value, a);
  EXPECT_EQ(back.tensors[1].value[0], -1.0 / 3.0);
}

TEST(CheckpointTest, RejectsWrongMagic) {
  std::stringstream ss("not-a-checkpoint 1\n");
  EXPECT_THROW(read_checkpoint(ss), Error);
}

}  // namespace
}  // namespace pitchaccent::nn

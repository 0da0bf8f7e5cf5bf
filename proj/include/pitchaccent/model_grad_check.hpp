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

// Finite-difference check of the full lexico-acoustic model's gradients.

#ifndef PITCHACCENT_MODEL_GRAD_CHECK_HPP
#define PITCHACCENT_MODEL_GRAD_CHECK_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "pitchaccent/model.hpp"
#include "pitchaccent/nn/grad_check.hpp"

namespace pitchaccent {

struct ModelGradCheckOptions {
  std::uint64_t seed = 7;
  ModelMode mode = ModelMode::kAcousticEmbs;
  int s_max = 26;
  int embed_dim = 20;
  int n_words = 3;
  int bottleneck_n = 10;
  int batch = 3;
  double l2_lambda = 1e-3;
  nn::GradCheckOptions check;
};

// Random model and batch; dropout off (eval mode), 64-bit.
inline nn::GradCheckResult model_grad_check(const ModelGradCheckOptions& o = {}) {
  std::mt19937_64 rng(o.seed);
  AcousticConfig ac;
  ac.s_max = o.s_max;
  ac.l2_lambda = o.l2_lambda;
  LexicalConfig lc;
  lc.embed_dim = o.embed_dim;
  lc.n_words = o.n_words;
  lc.bottleneck_n = o.bottleneck_n;
  lc.l2_lambda = 2.0 * o.l2_lambda;
  auto model = build_model<double>(ac, lc, o.mode, rng);
  // Non-zero biases so that every bias gradient is exercised away from zero.
  for (auto* b : {&model.params.conv1.bias, &model.params.conv2.bias, &model.params.bottleneck.bias,
                  &model.params.output.bias}) {
    for (auto& v : b->values()) v = 0.1 * (2.0 * nn::uniform01(rng) - 1.0);
  }

  std::vector<LabeledExample<double>> examples(static_cast<std::size_t>(o.batch));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto& ex = examples[i];
    if (uses_acoustic(o.mode)) {
      ex.acoustic = Tensor<double>({1, static_cast<std::size_t>(o.s_max), static_cast<std::size_t>(kMatrixRows)});
      for (std::size_t t = 0; t < static_cast<std::size_t>(o.s_max); ++t) {
        for (int r = 0; r < dsp::kNumDescriptors; ++r) ex.acoustic.at(0, t, r) = 2.0 * nn::uniform01(rng) - 1.0;
        ex.acoustic.at(0, t, kIndicatorRow) = (t >= 4 && t < 12) ? 1.0 : 0.0;
      }
    }
    if (uses_lexical(o.mode)) {
      ex.lexical = Tensor<double>({static_cast<std::size_t>(lc.input_size())});
      for (auto& v : ex.lexical.values()) v = 2.0 * nn::uniform01(rng) - 1.0;
    }
    ex.gold = i % 2 ? AccentLabel::kAccented : AccentLabel::kNone;
  }
  std::vector<const LabeledExample<double>*> batch;
  for (const auto& ex : examples) batch.push_back(&ex);
  const std::span<const LabeledExample<double>* const> bspan(batch);

  ModelParams<double> grads = model.params.zeros_like();
  std::mt19937_64 unused(0);
  loss_and_grads<double>(model, bspan, nn::Mode::kEval, unused, grads);

  auto params = model.params.tensors();
  auto g = grads.tensors();
  std::vector<const Tensor<double>*> analytic(g.begin(), g.end());
  nn::GradCheckOptions check = o.check;
  check.seed = o.seed;
  return nn::grad_check([&] { return evaluate_loss<double>(model, bspan).loss; }, params, analytic, check);
}

}  // namespace pitchaccent

#endif  // PITCHACCENT_MODEL_GRAD_CHECK_HPP

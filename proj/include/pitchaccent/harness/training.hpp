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

// Mini-batch Adam training with dev-set model selection.

#ifndef PITCHACCENT_HARNESS_TRAINING_HPP
#define PITCHACCENT_HARNESS_TRAINING_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/harness/splits.hpp"
#include "pitchaccent/model.hpp"
#include "pitchaccent/nn/adam.hpp"

namespace pitchaccent::harness {

struct TrainOptions {
  int epochs = 20;
  std::size_t batch_size = 32;
  nn::AdamOptions adam;
};

template <typename Real>
struct TrainResult {
  LexicoAcousticModel<Real> model;  // parameters of the selected epoch
  int best_epoch = 0;               // 1-based
  double best_dev_accuracy = -1.0;  // percent
  std::vector<double> dev_accuracy;
  std::vector<double> train_loss;  // mean batch loss per epoch
};

template <typename Real>
std::vector<AccentLabel> predict_all(const LexicoAcousticModel<Real>& model,
                                     std::span<const LabeledExample<Real>> examples) {
  std::vector<AccentLabel> out;
  out.reserve(examples.size());
  std::mt19937_64 unused(0);
  ForwardCache<Real> cache;
  for (const auto& ex : examples) {
    out.push_back(predict_from_logits(forward_logits(model, ex.input(), nn::Mode::kEval, unused, &cache)));
  }
  return out;
}

template <typename Real>
double accuracy_percent(const LexicoAcousticModel<Real>& model, std::span<const LabeledExample<Real>> examples) {
  const auto pred = predict_all(model, examples);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == examples[i].gold ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(examples.size());
}

// Trains for options.epochs epochs and returns the parameters of the epoch with
// the highest dev accuracy (earliest epoch on ties). The seed drives batch order
// and dropout. A non-finite loss or parameter aborts with Error.
template <typename Real>
TrainResult<Real> train_fold(LexicoAcousticModel<Real> model, std::span<const LabeledExample<Real>> train,
                             std::span<const LabeledExample<Real>> dev, const TrainOptions& options,
                             std::uint64_t seed) {
  if (train.empty()) throw Error("train_fold: empty training set");
  if (dev.empty()) throw Error("train_fold: empty dev set");
  if (options.epochs < 1) throw Error("train_fold: epochs must be >= 1");
  if (options.batch_size < 1) throw Error("train_fold: batch size must be >= 1");

  std::mt19937_64 order_rng(mix_seed(seed, 1));
  std::mt19937_64 dropout_rng(mix_seed(seed, 2));
  nn::AdamState<Real> adam;
  adam.options = options.adam;
  ModelParams<Real> grads = model.params.zeros_like();
  std::vector<const LabeledExample<Real>*> batch;
  TrainResult<Real> result;

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto perm = seeded_permutation(train.size(), order_rng());
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < perm.size(); start += options.batch_size) {
      const std::size_t end = std::min(perm.size(), start + options.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[perm[i]]);
      const LossValue loss =
          loss_and_grads<Real>(model, std::span<const LabeledExample<Real>* const>(batch), nn::Mode::kTrain,
                               dropout_rng, grads);
      if (!std::isfinite(loss.loss)) {
        throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(batches + 1) + " (data loss " + std::to_string(loss.data_loss) + ", penalty " +
                    std::to_string(loss.penalty) + ", step " + std::to_string(adam.step_count) + ")");
      }
      adam_update(model, grads, adam);
      loss_sum += loss.loss;
      ++batches;
    }
    if (!model.params.all_finite()) {
      throw Error("training diverged: non-finite parameter after epoch " + std::to_string(epoch));
    }
    const double acc = accuracy_percent<Real>(model, dev);
    result.dev_accuracy.push_back(acc);
    result.train_loss.push_back(loss_sum / static_cast<double>(batches));
    if (acc > result.best_dev_accuracy) {
      result.best_dev_accuracy = acc;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

}  // namespace pitchaccent::harness

#endif  // PITCHACCENT_HARNESS_TRAINING_HPP

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

// Accuracy, precision/recall/F1 on the accented class, and stopword accuracy.
// All reported values are percentages.

#ifndef PITCHACCENT_HARNESS_METRICS_HPP
#define PITCHACCENT_HARNESS_METRICS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/corpus.hpp"

namespace pitchaccent::harness {

struct ConfusionMatrix {
  std::size_t true_accented = 0;   // gold accented, predicted accented
  std::size_t false_accented = 0;  // gold none, predicted accented
  std::size_t true_none = 0;
  std::size_t false_none = 0;      // gold accented, predicted none
  std::size_t stopword_correct = 0;
  std::size_t stopword_total = 0;

  std::size_t total() const { return true_accented + false_accented + true_none + false_none; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricsReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing was predicted accented
  double recall = 0.0;     // 0 when nothing is gold accented
  double f1 = 0.0;         // harmonic mean of precision and recall; 0 when both are 0
  std::optional<double> stopword_accuracy;

  bool operator==(const MetricsReport&) const = default;
};

inline MetricsReport metrics_from_confusion(const ConfusionMatrix& c) {
  MetricsReport r;
  r.confusion = c;
  const std::size_t total = c.total();
  if (total == 0) throw Error("metrics: no predictions");
  r.accuracy = 100.0 * static_cast<double>(c.true_accented + c.true_none) / static_cast<double>(total);
  const std::size_t predicted = c.true_accented + c.false_accented;
  const std::size_t actual = c.true_accented + c.false_none;
  r.precision = predicted ? 100.0 * static_cast<double>(c.true_accented) / static_cast<double>(predicted) : 0.0;
  r.recall = actual ? 100.0 * static_cast<double>(c.true_accented) / static_cast<double>(actual) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  if (c.stopword_total > 0) {
    r.stopword_accuracy = 100.0 * static_cast<double>(c.stopword_correct) / static_cast<double>(c.stopword_total);
  }
  return r;
}

// stopword_mask may be empty (no stopword accuracy) or aligned with gold.
inline MetricsReport compute_metrics(std::span<const AccentLabel> predictions, std::span<const AccentLabel> gold,
                                     const std::vector<bool>& stopword_mask) {
  if (predictions.size() != gold.size()) throw Error("compute_metrics: prediction/gold length mismatch");
  if (!stopword_mask.empty() && stopword_mask.size() != gold.size()) {
    throw Error("compute_metrics: stopword mask length mismatch");
  }
  ConfusionMatrix c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == AccentLabel::kAccented;
    const bool p = predictions[i] == AccentLabel::kAccented;
    if (g && p) ++c.true_accented;
    if (!g && p) ++c.false_accented;
    if (!g && !p) ++c.true_none;
    if (g && !p) ++c.false_none;
    if (!stopword_mask.empty() && stopword_mask[i]) {
      ++c.stopword_total;
      c.stopword_correct += g == p ? 1 : 0;
    }
  }
  return metrics_from_confusion(c);
}

// Arithmetic means over runs (folds x repetitions). The mean F1 is the mean of
// per-run F1 values, not the harmonic mean of the mean precision and recall.
struct MetricsSummary {
  std::size_t runs = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> stopword_accuracy;  // mean over runs that have stopwords

  bool operator==(const MetricsSummary&) const = default;
};

inline MetricsSummary summarize(std::span<const MetricsReport> reports) {
  MetricsSummary s;
  s.runs = reports.size();
  if (reports.empty()) return s;
  double stop = 0.0;
  std::size_t stop_runs = 0;
  for (const auto& r : reports) {
    s.accuracy += r.accuracy;
    s.precision += r.precision;
    s.recall += r.recall;
    s.f1 += r.f1;
    if (r.stopword_accuracy) {
      stop += *r.stopword_accuracy;
      ++stop_runs;
    }
  }
  const auto n = static_cast<double>(reports.size());
  s.accuracy /= n;
  s.precision /= n;
  s.recall /= n;
  s.f1 /= n;
  if (stop_runs) s.stopword_accuracy = stop / static_cast<double>(stop_runs);
  return s;
}

}  // namespace pitchaccent::harness

#endif  // PITCHACCENT_HARNESS_METRICS_HPP

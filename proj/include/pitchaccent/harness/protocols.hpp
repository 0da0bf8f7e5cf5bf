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

// Within-corpus, cross-corpus and ALL experiment protocols.

#ifndef PITCHACCENT_HARNESS_PROTOCOLS_HPP
#define PITCHACCENT_HARNESS_PROTOCOLS_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/embeddings.hpp"
#include "pitchaccent/harness/dataset.hpp"
#include "pitchaccent/harness/metrics.hpp"
#include "pitchaccent/harness/parallel.hpp"
#include "pitchaccent/harness/splits.hpp"
#include "pitchaccent/harness/training.hpp"
#include "pitchaccent/model.hpp"

namespace pitchaccent::harness {

enum class Protocol { kWithin, kCross, kAll };

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kWithin:
      return "within";
    case Protocol::kCross:
      return "cross";
    case Protocol::kAll:
      return "all";
  }
  return "?";
}

inline Protocol parse_protocol(std::string_view s) {
  if (s == "within") return Protocol::kWithin;
  if (s == "cross") return Protocol::kCross;
  if (s == "all" || s == "ALL") return Protocol::kAll;
  throw Error("unknown protocol '" + std::string(s) + "'");
}

struct ExperimentConfig {
  Protocol protocol = Protocol::kWithin;
  std::vector<std::string> sources;  // cross: exactly one; all: the non-target corpora
  std::string target;
  ModelMode mode = ModelMode::kAcoustic;
  AcousticConfig acoustic;  // s_max 0 = derive from the involved corpora
  LexicalConfig lexical;    // embed_dim is taken from the embedding table
  TrainOptions training;
  int folds = kDefaultFolds;
  int repetitions = 5;
  std::size_t dev_size = kDefaultDevSize;
  std::uint64_t seed = 1;
  int jobs = 1;
  int context = 1;  // neighbouring words on each side of the current word
};

// Seeds shared by every experiment with the same base seed, so that splits and
// hold-out orders are fixed per corpus.
inline std::uint64_t split_seed(std::uint64_t base) { return mix_seed(base, 0x73706c6974ULL); }
inline std::uint64_t holdout_seed(std::uint64_t base) { return mix_seed(base, 0x686f6c64ULL); }
// Repetition r uses base + r; the fold index is mixed in per job.
inline std::uint64_t job_seed(std::uint64_t base, int rep, int fold) {
  return mix_seed(base + static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(fold));
}

struct ExperimentInputs {
  std::vector<const PreparedCorpus*> corpora;
  const EmbeddingTable* embeddings = nullptr;
  // Persisted splits by corpus name; missing entries are made from the seed.
  std::map<std::string, std::vector<FoldSplit>> splits;
};

struct RunRow {
  Protocol protocol = Protocol::kWithin;
  std::string source;
  std::string target;
  ModelMode mode = ModelMode::kAcoustic;
  int fold = 0;
  int rep = 0;
  int best_epoch = 0;
  MetricsReport metrics;
};

struct ExperimentResult {
  ExperimentConfig config;  // resolved (s_max, embed_dim filled in)
  std::vector<RunRow> rows;  // sorted by (rep, fold)
  MetricsSummary summary;
};

using RowSink = std::function<void(const RunRow&)>;

namespace detail {

inline const PreparedCorpus& find_corpus(const ExperimentInputs& in, const std::string& name) {
  for (const auto* c : in.corpora) {
    if (c->corpus.name == name) return *c;
  }
  throw Error("corpus '" + name + "' not loaded");
}

inline std::vector<FoldSplit> splits_for(const ExperimentInputs& in, const ExperimentConfig& cfg,
                                         const PreparedCorpus& c) {
  auto it = in.splits.find(c.corpus.name);
  if (it != in.splits.end()) {
    if (it->second.size() != static_cast<std::size_t>(cfg.folds)) {
      throw Error("stored splits for " + c.corpus.name + " have " + std::to_string(it->second.size()) + " folds");
    }
    return it->second;
  }
  return make_cv_splits(c.word_count(), cfg.folds, split_seed(cfg.seed), cfg.dev_size);
}

template <typename Real>
struct TrainedModel {
  TrainResult<Real> result;
  FeatureScaler scaler;
};

template <typename Real>
TrainedModel<Real> train_on(const ExperimentConfig& cfg, std::span<const WordRecord* const> train,
                            std::span<const WordRecord* const> dev, std::uint64_t seed) {
  TrainedModel<Real> out;
  out.scaler = FeatureScaler::fit(train);
  const auto train_ex = make_examples<Real>(train, out.scaler);
  const auto dev_ex = make_examples<Real>(dev, out.scaler);
  std::mt19937_64 init_rng(mix_seed(seed, 0));
  auto model = build_model<Real>(cfg.acoustic, cfg.lexical, cfg.mode, init_rng);
  out.result = train_fold<Real>(std::move(model), train_ex, dev_ex, cfg.training, mix_seed(seed, 3));
  return out;
}

template <typename Real>
MetricsReport evaluate_on(const TrainedModel<Real>& tm, std::span<const WordRecord* const> test) {
  const auto ex = make_examples<Real>(test, tm.scaler);
  const auto pred = predict_all<Real>(tm.result.model, ex);
  std::vector<AccentLabel> gold;
  std::vector<bool> stop;
  gold.reserve(test.size());
  stop.reserve(test.size());
  bool any_stop = false;
  for (const auto* w : test) {
    gold.push_back(w->gold);
    stop.push_back(w->stopword);
    any_stop = any_stop || w->stopword;
  }
  if (!any_stop) stop.clear();
  return compute_metrics(pred, gold, stop);
}

inline std::vector<const WordRecord*> pick(const WordDataset& ds, const std::vector<WordId>& ids) {
  std::vector<const WordRecord*> out;
  out.reserve(ids.size());
  for (WordId id : ids) out.push_back(&ds.words.at(id));
  return out;
}

inline void check_disjoint(const std::vector<WordId>& a, const std::vector<WordId>& b, const std::string& what) {
  std::vector<WordId> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::vector<WordId> common;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
  if (!common.empty()) throw Error(what + ": " + std::to_string(common.size()) + " shared word ids");
}

}  // namespace detail

// Word ids (per corpus) of the training and dev data for one ALL-setting fold.
struct AllSettingFold {
  std::map<std::string, std::vector<WordId>> train;
  std::map<std::string, std::vector<WordId>> dev;
  std::vector<WordId> target_test;
};

// Training pool = every other corpus in full + the target fold's dev and train
// words. The dev set is drawn from the pool in proportion to each corpus's
// share; the target contributes the head of its fold's dev-then-train order and
// every other corpus the head of its seeded hold-out order. With one corpus this
// reproduces the within-corpus fold exactly.
inline AllSettingFold all_setting_fold(const FoldSplit& target_split, const std::string& target,
                                       const std::vector<std::pair<std::string, std::size_t>>& others,
                                       std::size_t dev_size, std::uint64_t base_seed) {
  AllSettingFold f;
  f.target_test = target_split.test;
  std::vector<WordId> target_pool = target_split.dev;
  target_pool.insert(target_pool.end(), target_split.train.begin(), target_split.train.end());
  std::size_t pool = target_pool.size();
  for (const auto& [name, n] : others) pool += n;
  const std::size_t total_dev = dev_size_for_pool(pool, dev_size);
  std::size_t assigned = 0;
  for (const auto& [name, n] : others) {
    const auto share = static_cast<std::size_t>(static_cast<double>(total_dev) * static_cast<double>(n) /
                                                static_cast<double>(pool));
    const auto order = seeded_permutation(n, holdout_seed(base_seed));
    f.dev[name].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(share));
    f.train[name].assign(order.begin() + static_cast<std::ptrdiff_t>(share), order.end());
    assigned += share;
  }
  const std::size_t target_share = std::min(total_dev - assigned, target_pool.size());
  f.dev[target].assign(target_pool.begin(), target_pool.begin() + static_cast<std::ptrdiff_t>(target_share));
  f.train[target].assign(target_pool.begin() + static_cast<std::ptrdiff_t>(target_share), target_pool.end());
  return f;
}

namespace detail {

// Resolved configuration, per-corpus datasets and the target's splits.
struct Setup {
  ExperimentConfig cfg;
  const PreparedCorpus* target = nullptr;
  std::map<std::string, WordDataset> data;
  std::vector<FoldSplit> splits;
};

inline Setup setup_experiment(ExperimentConfig cfg, const ExperimentInputs& in) {
  if (cfg.repetitions < 1) throw Error("repetitions must be >= 1");
  if (cfg.folds < 2) throw Error("folds must be >= 2");
  if (uses_lexical(cfg.mode)) {
    if (!in.embeddings) throw Error("mode " + std::string(to_string(cfg.mode)) + " needs --embeddings");
    cfg.lexical.embed_dim = in.embeddings->dim();
  }
  const PreparedCorpus& target = find_corpus(in, cfg.target);
  std::vector<const PreparedCorpus*> involved{&target};
  if (cfg.protocol == Protocol::kWithin && !cfg.sources.empty() &&
      !(cfg.sources.size() == 1 && cfg.sources[0] == cfg.target)) {
    throw Error("within-corpus protocol takes no source corpus");
  }
  if (cfg.protocol == Protocol::kCross) {
    if (cfg.sources.size() != 1) throw Error("cross-corpus protocol needs exactly one source corpus");
    if (cfg.sources[0] == cfg.target) throw Error("cross-corpus protocol needs source != target");
    involved.push_back(&find_corpus(in, cfg.sources[0]));
  }
  if (cfg.protocol == Protocol::kAll) {
    for (const auto& s : cfg.sources) {
      if (s == cfg.target) throw Error("ALL setting: target listed among the other corpora");
      involved.push_back(&find_corpus(in, s));
    }
  }

  // One s_max over every involved corpus.
  const int needed = required_s_max(involved, cfg.context);
  if (cfg.acoustic.s_max == 0) {
    cfg.acoustic.s_max = std::max(needed, cfg.acoustic.min_s_max());
  } else if (cfg.acoustic.s_max < needed) {
    throw Error("s_max " + std::to_string(cfg.acoustic.s_max) + " is smaller than the widest window (" +
                std::to_string(needed) + " frames)");
  }
  if (uses_acoustic(cfg.mode)) cfg.acoustic.validate();
  if (uses_lexical(cfg.mode)) cfg.lexical.validate();

  Setup s;
  for (const auto* c : involved) {
    s.data.emplace(c->corpus.name,
                   build_dataset(*c, cfg.mode, cfg.acoustic.s_max, in.embeddings, cfg.lexical.n_words, cfg.context));
  }
  s.splits = splits_for(in, cfg, target);
  for (const auto& sp : s.splits) check_split_integrity(sp, target.word_count());
  s.target = &target;
  s.cfg = std::move(cfg);
  return s;
}

}  // namespace detail

template <typename Real = double>
ExperimentResult run_experiment(ExperimentConfig config, const ExperimentInputs& in, const RowSink& sink = {}) {
  detail::Setup setup = detail::setup_experiment(std::move(config), in);
  const ExperimentConfig& cfg = setup.cfg;
  const auto& data = setup.data;
  const WordDataset& tdata = data.at(cfg.target);
  const auto& splits = setup.splits;

  const auto folds = static_cast<std::size_t>(cfg.folds);
  const auto reps = static_cast<std::size_t>(cfg.repetitions);
  std::vector<RunRow> rows(folds * reps);
  std::mutex sink_mutex;
  auto emit = [&](std::size_t slot, RunRow row) {
    row.protocol = cfg.protocol;
    row.target = cfg.target;
    row.mode = cfg.mode;
    std::lock_guard<std::mutex> lock(sink_mutex);
    rows[slot] = row;
    if (sink) sink(rows[slot]);
  };

  if (cfg.protocol == Protocol::kCross) {
    const std::string& src = cfg.sources[0];
    const WordDataset& sdata = data.at(src);
    // Source hold-out: the head of the seeded order is dev, the rest trains.
    const auto order = seeded_permutation(sdata.words.size(), holdout_seed(cfg.seed));
    const std::size_t nd = dev_size_for_pool(order.size(), cfg.dev_size);
    const std::vector<WordId> dev_ids(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nd));
    const std::vector<WordId> train_ids(order.begin() + static_cast<std::ptrdiff_t>(nd), order.end());
    parallel_for(reps, cfg.jobs, [&](std::size_t r) {
      const auto train = detail::pick(sdata, train_ids);
      const auto dev = detail::pick(sdata, dev_ids);
      const auto tm = detail::train_on<Real>(cfg, train, dev, job_seed(cfg.seed, static_cast<int>(r), -1));
      for (std::size_t f = 0; f < folds; ++f) {
        RunRow row;
        row.source = src;
        row.fold = static_cast<int>(f);
        row.rep = static_cast<int>(r);
        row.best_epoch = tm.result.best_epoch;
        row.metrics = detail::evaluate_on<Real>(tm, detail::pick(tdata, splits[f].test));
        emit(r * folds + f, row);
      }
    });
  } else {
    std::vector<std::pair<std::string, std::size_t>> others;
    if (cfg.protocol == Protocol::kAll) {
      for (const auto& s : cfg.sources) others.emplace_back(s, data.at(s).words.size());
    }
    parallel_for(folds * reps, cfg.jobs, [&](std::size_t job) {
      const std::size_t r = job / folds, f = job % folds;
      const FoldSplit& split = splits[f];
      detail::check_disjoint(split.test, split.train, "fold " + std::to_string(f) + " test/train");
      detail::check_disjoint(split.test, split.dev, "fold " + std::to_string(f) + " test/dev");
      std::vector<const WordRecord*> train, dev;
      if (cfg.protocol == Protocol::kWithin) {
        train = detail::pick(tdata, split.train);
        dev = detail::pick(tdata, split.dev);
      } else {
        const AllSettingFold af = all_setting_fold(split, cfg.target, others, cfg.dev_size, cfg.seed);
        detail::check_disjoint(af.target_test, af.train.at(cfg.target), "ALL fold " + std::to_string(f));
        detail::check_disjoint(af.target_test, af.dev.at(cfg.target), "ALL fold " + std::to_string(f) + " dev");
        // Target first, then the other corpora in the order given.
        auto append = [&](const std::string& name) {
          const auto t = detail::pick(data.at(name), af.train.at(name));
          const auto d = detail::pick(data.at(name), af.dev.at(name));
          train.insert(train.end(), t.begin(), t.end());
          dev.insert(dev.end(), d.begin(), d.end());
        };
        append(cfg.target);
        for (const auto& s : cfg.sources) append(s);
      }
      const auto tm = detail::train_on<Real>(cfg, train, dev, job_seed(cfg.seed, static_cast<int>(r), static_cast<int>(f)));
      RunRow row;
      row.source = cfg.protocol == Protocol::kAll ? "ALL" : cfg.target;
      row.fold = static_cast<int>(f);
      row.rep = static_cast<int>(r);
      row.best_epoch = tm.result.best_epoch;
      row.metrics = detail::evaluate_on<Real>(tm, detail::pick(tdata, split.test));
      emit(job, row);
    });
  }

  ExperimentResult result;
  result.config = cfg;
  result.rows = std::move(rows);
  std::vector<MetricsReport> reports;
  for (const auto& r : result.rows) reports.push_back(r.metrics);
  result.summary = summarize(reports);
  return result;
}

template <typename Real = double>
ExperimentResult run_within(ExperimentConfig cfg, const ExperimentInputs& in, const RowSink& sink = {}) {
  cfg.protocol = Protocol::kWithin;
  return run_experiment<Real>(std::move(cfg), in, sink);
}

template <typename Real = double>
ExperimentResult run_cross(ExperimentConfig cfg, const ExperimentInputs& in, const RowSink& sink = {}) {
  cfg.protocol = Protocol::kCross;
  return run_experiment<Real>(std::move(cfg), in, sink);
}

template <typename Real = double>
ExperimentResult run_all_setting(ExperimentConfig cfg, const ExperimentInputs& in, const RowSink& sink = {}) {
  cfg.protocol = Protocol::kAll;
  return run_experiment<Real>(std::move(cfg), in, sink);
}

template <typename Real = double>
struct SingleFoldRun {
  ExperimentConfig config;  // resolved
  LexicoAcousticModel<Real> model;
  FeatureScaler scaler;
  TrainResult<Real> training;
  RunRow row;
};

// Within-corpus training and evaluation of one fold and repetition, keeping the
// selected model.
template <typename Real = double>
SingleFoldRun<Real> run_single_fold(ExperimentConfig config, const ExperimentInputs& in, int fold, int rep = 0) {
  config.protocol = Protocol::kWithin;
  detail::Setup setup = detail::setup_experiment(std::move(config), in);
  const auto& cfg = setup.cfg;
  if (fold < 0 || fold >= cfg.folds) throw Error("fold " + std::to_string(fold) + " out of range");
  const FoldSplit& split = setup.splits[static_cast<std::size_t>(fold)];
  const WordDataset& tdata = setup.data.at(cfg.target);
  auto tm = detail::train_on<Real>(cfg, detail::pick(tdata, split.train), detail::pick(tdata, split.dev),
                                   job_seed(cfg.seed, rep, fold));
  SingleFoldRun<Real> out;
  out.config = cfg;
  out.row.protocol = Protocol::kWithin;
  out.row.source = out.row.target = cfg.target;
  out.row.mode = cfg.mode;
  out.row.fold = fold;
  out.row.rep = rep;
  out.row.best_epoch = tm.result.best_epoch;
  out.row.metrics = detail::evaluate_on<Real>(tm, detail::pick(tdata, split.test));
  out.model = tm.result.model;
  out.scaler = tm.scaler;
  out.training = std::move(tm.result);
  return out;
}

// Checkpoint of a trained model plus its feature scaler.
template <typename Real>
nn::Checkpoint checkpoint_with_scaler(const LexicoAcousticModel<Real>& model, const FeatureScaler& scaler,
                                      std::uint64_t seed, const std::string& config_hash) {
  nn::Checkpoint ckpt = to_checkpoint(model, seed, config_hash);
  nn::Tensor<double> mean({scaler.mean.size()}), scale({scaler.scale.size()});
  for (std::size_t i = 0; i < scaler.mean.size(); ++i) {
    mean[i] = scaler.mean[i];
    scale[i] = scaler.scale[i];
  }
  ckpt.tensors.push_back({"scaler.mean", mean});
  ckpt.tensors.push_back({"scaler.scale", scale});
  return ckpt;
}

inline FeatureScaler scaler_from_checkpoint(const nn::Checkpoint& ckpt) {
  const auto* mean = ckpt.find("scaler.mean");
  const auto* scale = ckpt.find("scaler.scale");
  if (!mean || !scale) throw Error("checkpoint lacks the feature scaler");
  FeatureScaler s;
  if (mean->size() != s.mean.size() || scale->size() != s.scale.size()) throw Error("checkpoint scaler has wrong size");
  for (std::size_t i = 0; i < s.mean.size(); ++i) {
    s.mean[i] = (*mean)[i];
    s.scale[i] = (*scale)[i];
  }
  return s;
}

// ---- persisted results ----

inline constexpr std::string_view kResultsHeader =
    "protocol,source,target,mode,fold,rep,accuracy,precision,recall,f1,stopword_acc";
inline constexpr std::string_view kConfusionHeader =
    "protocol,source,target,mode,fold,rep,true_accented,false_accented,true_none,false_none,stopword_correct,"
    "stopword_total";

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_result_row(const RunRow& r) {
  std::ostringstream out;
  out << to_string(r.protocol) << ',' << r.source << ',' << r.target << ',' << to_string(r.mode) << ',' << r.fold
      << ',' << r.rep << ',' << format_number(r.metrics.accuracy) << ',' << format_number(r.metrics.precision) << ','
      << format_number(r.metrics.recall) << ',' << format_number(r.metrics.f1) << ','
      << (r.metrics.stopword_accuracy ? format_number(*r.metrics.stopword_accuracy) : std::string());
  return out.str();
}

inline std::string format_confusion_row(const RunRow& r) {
  const auto& c = r.metrics.confusion;
  std::ostringstream out;
  out << to_string(r.protocol) << ',' << r.source << ',' << r.target << ',' << to_string(r.mode) << ',' << r.fold
      << ',' << r.rep << ',' << c.true_accented << ',' << c.false_accented << ',' << c.true_none << ','
      << c.false_none << ',' << c.stopword_correct << ',' << c.stopword_total;
  return out.str();
}

// Append-only writer for results.csv and confusion.csv. Thread-safe.
class ResultsWriter {
 public:
  explicit ResultsWriter(const std::filesystem::path& dir)
      : results_(open(dir / "results.csv", kResultsHeader)), confusion_(open(dir / "confusion.csv", kConfusionHeader)) {}

  void append(const RunRow& row) {
    std::lock_guard<std::mutex> lock(mutex_);
    results_ << format_result_row(row) << '\n' << std::flush;
    confusion_ << format_confusion_row(row) << '\n' << std::flush;
  }

 private:
  static std::ofstream open(const std::filesystem::path& path, std::string_view header) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error(path.string() + ": cannot open for appending");
    if (fresh) out << header << '\n';
    return out;
  }

  std::mutex mutex_;
  std::ofstream results_;
  std::ofstream confusion_;
};

struct PersistedRow {
  std::string protocol, source, target, mode;
  int fold = 0, rep = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  std::optional<double> stopword_accuracy;
};

inline std::vector<PersistedRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open results file");
  std::string line;
  std::getline(in, line);
  if (line != kResultsHeader) throw Error(path.string() + ": unexpected header");
  std::vector<PersistedRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw Error(path.string() + ": malformed row '" + line + "'");
    PersistedRow r{f[0], f[1], f[2], f[3], std::stoi(f[4]), std::stoi(f[5]), std::stod(f[6]), std::stod(f[7]),
                   std::stod(f[8]), std::stod(f[9]), std::nullopt};
    if (!f[10].empty()) r.stopword_accuracy = std::stod(f[10]);
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<ConfusionMatrix> read_confusion_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open confusion file");
  std::string line;
  std::getline(in, line);
  if (line != kConfusionHeader) throw Error(path.string() + ": unexpected header");
  std::vector<ConfusionMatrix> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 12) throw Error(path.string() + ": malformed row '" + line + "'");
    ConfusionMatrix c;
    c.true_accented = std::stoull(f[6]);
    c.false_accented = std::stoull(f[7]);
    c.true_none = std::stoull(f[8]);
    c.false_none = std::stoull(f[9]);
    c.stopword_correct = std::stoull(f[10]);
    c.stopword_total = std::stoull(f[11]);
    out.push_back(c);
  }
  return out;
}

// Grid with one row per (source, mode) and one column per target, cells holding
// mean accuracy; followed by mean P/R/F1 and stopword accuracy per experiment.
inline std::string format_summary_grid(const std::vector<ExperimentResult>& results) {
  std::vector<std::string> targets;
  std::vector<std::pair<std::string, std::string>> row_keys;
  std::map<std::pair<std::pair<std::string, std::string>, std::string>, double> cells;
  for (const auto& r : results) {
    const std::string source = r.config.protocol == Protocol::kAll      ? "ALL"
                               : r.config.protocol == Protocol::kWithin ? r.config.target
                                                                        : r.config.sources.at(0);
    const std::pair<std::string, std::string> key{source, std::string(to_string(r.config.mode))};
    if (std::find(targets.begin(), targets.end(), r.config.target) == targets.end()) targets.push_back(r.config.target);
    if (std::find(row_keys.begin(), row_keys.end(), key) == row_keys.end()) row_keys.push_back(key);
    cells[{key, r.config.target}] = r.summary.accuracy;
  }
  std::ostringstream out;
  char buf[256];
  out << "accuracy (%)\n";
  std::snprintf(buf, sizeof(buf), "%-14s %-14s", "train", "mode");
  out << buf;
  for (const auto& t : targets) {
    std::snprintf(buf, sizeof(buf), " %10s", t.c_str());
    out << buf;
  }
  out << '\n';
  for (const auto& key : row_keys) {
    std::snprintf(buf, sizeof(buf), "%-14s %-14s", key.first.c_str(), key.second.c_str());
    out << buf;
    for (const auto& t : targets) {
      auto it = cells.find({key, t});
      if (it == cells.end()) {
        std::snprintf(buf, sizeof(buf), " %10s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), " %10.1f", it->second);
      }
      out << buf;
    }
    out << '\n';
  }
  out << "\naccent class and stopwords (%)\n";
  std::snprintf(buf, sizeof(buf), "%-8s %-14s %-10s %-14s %9s %9s %9s %9s %5s\n", "protocol", "train", "target", "mode",
                "precision", "recall", "f1", "stopword", "runs");
  out << buf;
  for (const auto& r : results) {
    const std::string source = r.config.protocol == Protocol::kAll      ? "ALL"
                               : r.config.protocol == Protocol::kWithin ? r.config.target
                                                                        : r.config.sources.at(0);
    char stop[16];
    if (r.summary.stopword_accuracy) {
      std::snprintf(stop, sizeof(stop), "%.1f", *r.summary.stopword_accuracy);
    } else {
      std::snprintf(stop, sizeof(stop), "-");
    }
    char line[256];
    std::snprintf(line, sizeof(line), "%-8s %-14s %-10s %-14s %9.1f %9.1f %9.1f %9s %5zu\n",
                  std::string(to_string(r.config.protocol)).c_str(), source.c_str(), r.config.target.c_str(),
                  std::string(to_string(r.config.mode)).c_str(), r.summary.precision, r.summary.recall, r.summary.f1,
                  stop, r.summary.runs);
    out << line;
  }
  return out.str();
}

}  // namespace pitchaccent::harness

#endif  // PITCHACCENT_HARNESS_PROTOCOLS_HPP

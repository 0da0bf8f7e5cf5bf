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

// Fixed k-fold splits over word ids (positions in flatten_words order).

#ifndef PITCHACCENT_HARNESS_SPLITS_HPP
#define PITCHACCENT_HARNESS_SPLITS_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pitchaccent/common.hpp"

namespace pitchaccent::harness {

using WordId = std::size_t;

inline constexpr int kDefaultFolds = 10;
inline constexpr std::size_t kDefaultDevSize = 1000;

struct FoldSplit {
  int fold_id = 0;
  std::vector<WordId> train;
  std::vector<WordId> dev;
  std::vector<WordId> test;

  bool operator==(const FoldSplit&) const = default;
};

// Dev words taken from a pool of `pool` words. Small pools keep at least half
// of their words for training.
inline std::size_t dev_size_for_pool(std::size_t pool, std::size_t dev_size = kDefaultDevSize) {
  return std::min(dev_size, pool / 2);
}

// Seeded permutation of 0..n-1 (Fisher-Yates on mt19937_64, independent of the
// standard library's shuffle implementation).
inline std::vector<WordId> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<WordId> ids(n);
  std::iota(ids.begin(), ids.end(), WordId{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(ids[i - 1], ids[j]);
  }
  return ids;
}

// Words are shuffled once, then cut into k contiguous test blocks whose sizes
// differ by at most one. For each fold the remaining words keep their shuffled
// order; dev is their head and train the rest.
inline std::vector<FoldSplit> make_cv_splits(std::size_t n_words, int k, std::uint64_t seed,
                                             std::size_t dev_size = kDefaultDevSize) {
  if (k < 2) throw Error("make_cv_splits: k must be >= 2");
  if (n_words <= static_cast<std::size_t>(k) * 2) {
    throw Error("make_cv_splits: corpus of " + std::to_string(n_words) + " words is too small for " +
                std::to_string(k) + " folds (need more than " + std::to_string(2 * k) + ")");
  }
  const auto order = seeded_permutation(n_words, seed);
  const auto uk = static_cast<std::size_t>(k);
  std::vector<std::size_t> bounds(uk + 1, 0);
  for (std::size_t f = 0; f < uk; ++f) bounds[f + 1] = bounds[f] + n_words / uk + (f < n_words % uk ? 1 : 0);

  std::vector<FoldSplit> splits(uk);
  for (std::size_t f = 0; f < uk; ++f) {
    FoldSplit& s = splits[f];
    s.fold_id = static_cast<int>(f);
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(bounds[f]),
                  order.begin() + static_cast<std::ptrdiff_t>(bounds[f + 1]));
    std::vector<WordId> rest;
    rest.reserve(n_words - s.test.size());
    rest.insert(rest.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(bounds[f]));
    rest.insert(rest.end(), order.begin() + static_cast<std::ptrdiff_t>(bounds[f + 1]), order.end());
    const std::size_t nd = dev_size_for_pool(rest.size(), dev_size);
    s.dev.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(nd));
    s.train.assign(rest.begin() + static_cast<std::ptrdiff_t>(nd), rest.end());
  }
  return splits;
}

// Throws unless train, dev and test are pairwise disjoint, in range, and
// (when n_words is non-zero) cover 0..n_words-1 exactly.
inline void check_split_integrity(const FoldSplit& s, std::size_t n_words) {
  std::vector<int> seen(n_words, 0);
  auto mark = [&](const std::vector<WordId>& ids, const char* what) {
    for (WordId id : ids) {
      if (id >= n_words) throw Error("fold " + std::to_string(s.fold_id) + ": " + what + " id out of range");
      if (seen[id]++) {
        throw Error("fold " + std::to_string(s.fold_id) + ": word " + std::to_string(id) + " appears twice (" + what +
                    ")");
      }
    }
  };
  mark(s.test, "test");
  mark(s.dev, "dev");
  mark(s.train, "train");
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error("fold " + std::to_string(s.fold_id) + ": split does not cover the corpus");
  }
}

// Text format: one header line, then per fold three lines "train|dev|test <fold> ids...".
inline void write_splits(std::ostream& out, const std::vector<FoldSplit>& splits, std::size_t n_words) {
  out << "pitchaccent-splits 1 words " << n_words << " folds " << splits.size() << '\n';
  auto line = [&](const char* tag, int fold, const std::vector<WordId>& ids) {
    out << tag << ' ' << fold;
    for (WordId id : ids) out << ' ' << id;
    out << '\n';
  };
  for (const auto& s : splits) {
    line("train", s.fold_id, s.train);
    line("dev", s.fold_id, s.dev);
    line("test", s.fold_id, s.test);
  }
}

inline std::vector<FoldSplit> read_splits(std::istream& in, std::size_t expected_words,
                                          const std::string& origin = "<stream>") {
  std::string magic, kw1, kw2;
  int version = 0;
  std::size_t n_words = 0, folds = 0;
  if (!(in >> magic >> version >> kw1 >> n_words >> kw2 >> folds) || magic != "pitchaccent-splits" || version != 1 ||
      kw1 != "words" || kw2 != "folds") {
    throw Error(origin + ": not a splits file");
  }
  if (n_words != expected_words) {
    throw Error(origin + ": splits cover " + std::to_string(n_words) + " words, corpus has " +
                std::to_string(expected_words));
  }
  std::string rest;
  std::getline(in, rest);
  std::vector<FoldSplit> splits(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    for (const char* tag : {"train", "dev", "test"}) {
      std::string line, t;
      int fold = -1;
      if (!std::getline(in, line)) throw Error(origin + ": truncated splits file");
      std::istringstream ls(line);
      if (!(ls >> t >> fold) || t != tag || fold != static_cast<int>(f)) {
        throw Error(origin + ": expected '" + tag + " " + std::to_string(f) + "'");
      }
      auto& ids = t == "train" ? splits[f].train : t == "dev" ? splits[f].dev : splits[f].test;
      WordId id;
      while (ls >> id) ids.push_back(id);
    }
    splits[f].fold_id = static_cast<int>(f);
    check_split_integrity(splits[f], n_words);
  }
  return splits;
}

inline void save_splits(const std::filesystem::path& path, const std::vector<FoldSplit>& splits,
                        std::size_t n_words) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_splits(out, splits, n_words);
}

inline std::vector<FoldSplit> load_splits(const std::filesystem::path& path, std::size_t expected_words) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open splits file");
  return read_splits(in, expected_words, path.string());
}

// Splits stored at `path` when present, otherwise freshly made and saved there.
inline std::vector<FoldSplit> load_or_make_splits(const std::filesystem::path& path, std::size_t n_words, int k,
                                                  std::uint64_t seed, std::size_t dev_size = kDefaultDevSize) {
  if (std::filesystem::exists(path)) {
    auto splits = load_splits(path, n_words);
    if (splits.size() != static_cast<std::size_t>(k)) {
      throw Error(path.string() + ": has " + std::to_string(splits.size()) + " folds, expected " + std::to_string(k));
    }
    return splits;
  }
  auto splits = make_cv_splits(n_words, k, seed, dev_size);
  save_splits(path, splits, n_words);
  return splits;
}

}  // namespace pitchaccent::harness

#endif  // PITCHACCENT_HARNESS_SPLITS_HPP

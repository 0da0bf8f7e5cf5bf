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

// Corpus -> feature tracks -> per-word input matrices and lexical vectors.

#ifndef PITCHACCENT_HARNESS_DATASET_HPP
#define PITCHACCENT_HARNESS_DATASET_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/corpus.hpp"
#include "pitchaccent/dsp/features.hpp"
#include "pitchaccent/dsp/wav.hpp"
#include "pitchaccent/embeddings.hpp"
#include "pitchaccent/harness/parallel.hpp"
#include "pitchaccent/model.hpp"

namespace pitchaccent::harness {

struct PreparedCorpus {
  Corpus corpus;
  std::vector<dsp::FrameFeatureTrack> tracks;  // one per utterance
  std::vector<bool> stopwords;                 // flatten_words order

  std::size_t word_count() const { return stopwords.size(); }
  std::vector<std::size_t> track_lengths() const {
    std::vector<std::size_t> out;
    out.reserve(tracks.size());
    for (const auto& t : tracks) out.push_back(t.size());
    return out;
  }
};

// Extracts one track per utterance. With a cache directory, tracks are read
// from <cache>/<utterance id>.csv when present and written there otherwise.
inline std::vector<dsp::FrameFeatureTrack> extract_tracks(const Corpus& corpus, int jobs = 1,
                                                          const std::filesystem::path& cache_dir = {}) {
  if (!cache_dir.empty()) std::filesystem::create_directories(cache_dir);
  std::vector<dsp::FrameFeatureTrack> tracks(corpus.utterances.size());
  parallel_for(corpus.utterances.size(), jobs, [&](std::size_t u) {
    const auto& utt = corpus.utterances[u];
    const std::filesystem::path cached = cache_dir.empty() ? std::filesystem::path{} : cache_dir / (utt.id + ".csv");
    if (!cached.empty() && std::filesystem::exists(cached)) {
      std::ifstream in(cached);
      tracks[u] = dsp::read_track_csv(in, cached.string());
      return;
    }
    const auto& path = utt.resolved_audio_path.empty() ? std::filesystem::path(utt.audio_path) : utt.resolved_audio_path;
    tracks[u] = dsp::extract_lld_track(dsp::load_wav(path));
    if (!cached.empty()) dsp::write_track_csv(cached, tracks[u]);
  });
  return tracks;
}

inline PreparedCorpus prepare_corpus(Corpus corpus, const StopwordSet& stopwords = default_stopwords(), int jobs = 1,
                                     const std::filesystem::path& cache_dir = {}) {
  PreparedCorpus p;
  p.tracks = extract_tracks(corpus, jobs, cache_dir);
  p.stopwords = stopword_mask(corpus, stopwords);
  p.corpus = std::move(corpus);
  return p;
}

// Frames needed to hold the widest context window over all given corpora.
inline int required_s_max(std::span<const PreparedCorpus* const> corpora, int context = 1) {
  int s = 0;
  for (const auto* c : corpora) {
    const auto lengths = c->track_lengths();
    s = std::max(s, max_window_frames(c->corpus, lengths, context));
  }
  return s;
}

struct WordRecord {
  InputMatrix matrix;           // empty values when the acoustic branch is unused
  std::vector<double> lexical;  // empty when the lexical branch is unused
  AccentLabel gold = AccentLabel::kNone;
  bool stopword = false;
};

struct WordDataset {
  std::string name;
  int s_max = 0;
  std::vector<WordRecord> words;  // flatten_words order
};

inline WordDataset build_dataset(const PreparedCorpus& pc, ModelMode mode, int s_max, const EmbeddingTable* table,
                                 int n_words, int context = 1) {
  if (uses_lexical(mode) && !table) throw Error("mode " + std::string(to_string(mode)) + " needs word embeddings");
  if (pc.tracks.size() != pc.corpus.utterances.size()) throw Error("build_dataset: track count mismatch");
  WordDataset ds;
  ds.name = pc.corpus.name;
  ds.s_max = s_max;
  ds.words.reserve(pc.word_count());
  std::size_t id = 0;
  for (std::size_t u = 0; u < pc.corpus.utterances.size(); ++u) {
    const auto& utt = pc.corpus.utterances[u];
    for (std::size_t w = 0; w < utt.words.size(); ++w, ++id) {
      WordRecord r;
      r.gold = utt.words[w].label;
      r.stopword = pc.stopwords[id];
      if (uses_acoustic(mode)) {
        const WordSlice slice = slice_word_frames(pc.tracks[u], utt, w, context);
        r.matrix = build_input_matrix(slice.frames, slice.current_span, s_max);
      }
      if (uses_lexical(mode)) r.lexical = ngram_vectors(utt, w, n_words, *table).vector;
      ds.words.push_back(std::move(r));
    }
  }
  return ds;
}

// Per-descriptor z-scoring fitted on the real (non-padded) columns of the
// training words. Padding columns and the indicator row are left untouched.
struct FeatureScaler {
  std::array<double, dsp::kNumDescriptors> mean{};
  std::array<double, dsp::kNumDescriptors> scale{};

  FeatureScaler() { scale.fill(1.0); }

  static FeatureScaler fit(std::span<const WordRecord* const> words) {
    FeatureScaler s;
    std::array<double, dsp::kNumDescriptors> sum{}, sum_sq{};
    std::size_t count = 0;
    for (const auto* w : words) {
      if (w->matrix.values.empty()) continue;
      for (std::size_t c = 0; c < w->matrix.frame_count; ++c) {
        for (int r = 0; r < dsp::kNumDescriptors; ++r) {
          const double v = w->matrix.at(r, c);
          sum[static_cast<std::size_t>(r)] += v;
          sum_sq[static_cast<std::size_t>(r)] += v * v;
        }
      }
      count += w->matrix.frame_count;
    }
    if (count == 0) return s;
    for (std::size_t r = 0; r < s.mean.size(); ++r) {
      s.mean[r] = sum[r] / static_cast<double>(count);
      const double var = std::max(0.0, sum_sq[r] / static_cast<double>(count) - s.mean[r] * s.mean[r]);
      const double sd = std::sqrt(var);
      s.scale[r] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
  }

  InputMatrix apply(const InputMatrix& m) const {
    InputMatrix out = m;
    for (std::size_t c = 0; c < m.frame_count; ++c) {
      for (int r = 0; r < dsp::kNumDescriptors; ++r) {
        const auto i = static_cast<std::size_t>(r);
        out.at(r, c) = (m.at(r, c) - mean[i]) / scale[i];
      }
    }
    return out;
  }
};

template <typename Real>
LabeledExample<Real> make_example(const WordRecord& w, const FeatureScaler& scaler) {
  LabeledExample<Real> ex;
  ex.gold = w.gold;
  if (!w.matrix.values.empty()) ex.acoustic = to_acoustic_input<Real>(scaler.apply(w.matrix));
  if (!w.lexical.empty()) ex.lexical = to_lexical_input<Real>(w.lexical);
  return ex;
}

template <typename Real>
std::vector<LabeledExample<Real>> make_examples(std::span<const WordRecord* const> words, const FeatureScaler& scaler) {
  std::vector<LabeledExample<Real>> out;
  out.reserve(words.size());
  for (const auto* w : words) out.push_back(make_example<Real>(*w, scaler));
  return out;
}

}  // namespace pitchaccent::harness

#endif  // PITCHACCENT_HARNESS_DATASET_HPP

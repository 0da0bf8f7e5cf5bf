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

// Synthetic corpora with planted lexical and acoustic accent rules.
//
// Every content word type is either accent-prone or not (fixed by vocab_seed).
// A token of a prone type is accented with probability lexical_correlation, a
// token of any other type with 1 - lexical_correlation. Independently of the
// type, each token carries an acoustic cue: with probability acoustic_strength
// the cue equals the label, otherwise it is a fair coin. A prominent cue is a
// loud harmonic burst with a raised, rising F0; a plain cue is quiet and low.
//
// Output directory layout:
//   manifest.tsv, audio/<utterance>.wav, embeddings.txt (GloVe text format),
//   ground_truth.json.

#ifndef PITCHACCENT_HARNESS_SYNTHETIC_HPP
#define PITCHACCENT_HARNESS_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pitchaccent/common.hpp"
#include "pitchaccent/corpus.hpp"
#include "pitchaccent/dsp/wav.hpp"
#include "pitchaccent/embeddings.hpp"
#include "pitchaccent/nn/layers.hpp"

namespace pitchaccent::harness {

struct ForcedWord {
  std::string word;
  double token_share = 0.0;  // fraction of all tokens
  double accent_probability = 1.0;
};

struct SyntheticSpec {
  std::string name = "synthetic";
  std::size_t n_words = 2000;
  int vocab_size = 60;
  double prone_fraction = 0.5;
  double lexical_correlation = 0.5;  // 0.5 = word identity carries no information
  double stopword_share = 0.15;
  double stopword_accent_probability = 0.05;
  std::vector<ForcedWord> forced_words;
  double acoustic_strength = 1.0;
  std::size_t oov_tokens = 0;    // tokens of words absent from the embedding file
  std::size_t oov_accented = 0;  // how many of them are accented
  int min_words_per_utterance = 5;
  int max_words_per_utterance = 12;
  int speakers = 4;
  int sample_rate = 16000;
  int embed_dim = 300;
  std::uint64_t seed = 1;
  std::uint64_t vocab_seed = 1;

  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (n_words < 1) throw Error("synthetic: n_words must be >= 1");
    if (vocab_size < 2) throw Error("synthetic: vocab_size must be >= 2");
    if (!unit(prone_fraction) || !unit(lexical_correlation) || !unit(stopword_share) ||
        !unit(stopword_accent_probability) || !unit(acoustic_strength)) {
      throw Error("synthetic: probabilities must lie in [0, 1]");
    }
    double share = stopword_share;
    for (const auto& f : forced_words) {
      if (f.word.empty() || normalized_token(f.word) != f.word) {
        throw Error("synthetic: forced word '" + f.word + "' must be a lowercase letter string");
      }
      if (!unit(f.token_share) || !unit(f.accent_probability)) throw Error("synthetic: bad forced word share");
      share += f.token_share;
    }
    if (share > 1.0 + 1e-12) throw Error("synthetic: token shares exceed 1");
    if (oov_accented > oov_tokens || oov_tokens > n_words) throw Error("synthetic: bad OOV token counts");
    if (min_words_per_utterance < 1 || max_words_per_utterance < min_words_per_utterance) {
      throw Error("synthetic: bad words-per-utterance range");
    }
    if (speakers < 1) throw Error("synthetic: speakers must be >= 1");
    if (sample_rate < 8000) throw Error("synthetic: sample rate must be >= 8000");
    if (embed_dim < 1) throw Error("synthetic: embed_dim must be >= 1");
  }
};

struct SyntheticCorpus {
  Corpus corpus;  // as loaded back from the written manifest
  std::filesystem::path directory;
  std::filesystem::path manifest;
  std::filesystem::path embeddings;
  std::filesystem::path ground_truth;
  double designed_accent_rate = 0.0;
  std::vector<std::string> prone_words;
  std::vector<std::string> plain_words;
  std::vector<std::string> oov_words;
};

namespace detail {

inline double gaussian(std::mt19937_64& rng) {
  // Box-Muller; avoids implementation-defined std::normal_distribution.
  const double u1 = 1.0 - nn::uniform01(rng);
  const double u2 = nn::uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::size_t below(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline bool bernoulli(std::mt19937_64& rng, double p) { return nn::uniform01(rng) < p; }

inline std::string pseudo_word(std::mt19937_64& rng) {
  static const char kConsonants[] = "bdfgklmnprstvz";
  static const char kVowels[] = "aeiou";
  std::string w;
  const std::size_t syllables = 2 + below(rng, 2);
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kConsonants[below(rng, sizeof(kConsonants) - 1)];
    w += kVowels[below(rng, sizeof(kVowels) - 1)];
  }
  if (below(rng, 3) == 0) w += kConsonants[below(rng, sizeof(kConsonants) - 1)];
  return w;
}

// Letters only, so normalization leaves it intact; 'q' never occurs in pseudo words.
inline std::string oov_word(std::size_t i) {
  std::string w = "zq";
  for (int k = 0; k < 3; ++k) {
    w += static_cast<char>('a' + i % 26);
    i /= 26;
  }
  return w;
}

struct WordType {
  std::string word;
  double accent_probability = 0.0;
  int duration_ms = 0;
  int embedding_sign = 0;  // +1 accent-prone direction, -1 otherwise, 0 no vector
};

}  // namespace detail

// Expected accent rate implied by the generator settings (before sampling noise).
inline double designed_accent_rate(const SyntheticSpec& spec) {
  const std::size_t n_prone =
      static_cast<std::size_t>(std::llround(spec.prone_fraction * static_cast<double>(spec.vocab_size)));
  const double prone = static_cast<double>(n_prone) / static_cast<double>(spec.vocab_size);
  const double c = spec.lexical_correlation;
  double content_share = 1.0 - spec.stopword_share;
  double rate = spec.stopword_share * spec.stopword_accent_probability;
  for (const auto& f : spec.forced_words) {
    rate += f.token_share * f.accent_probability;
    content_share -= f.token_share;
  }
  rate += content_share * (prone * c + (1.0 - prone) * (1.0 - c));
  const double n = static_cast<double>(spec.n_words);
  const double oov = static_cast<double>(spec.oov_tokens);
  return (rate * (n - oov) + static_cast<double>(spec.oov_accented)) / n;
}

inline SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "audio");

  // ---- vocabulary (depends on vocab_seed only) ----
  std::mt19937_64 vrng(mix_seed(spec.vocab_seed, 0x766f636162ULL));
  const StopwordSet stop = default_stopwords();
  std::set<std::string> taken(stop.begin(), stop.end());
  for (const auto& f : spec.forced_words) taken.insert(f.word);
  std::vector<detail::WordType> content;
  while (content.size() < static_cast<std::size_t>(spec.vocab_size)) {
    std::string w = detail::pseudo_word(vrng);
    if (!taken.insert(w).second) continue;
    detail::WordType t;
    t.word = w;
    t.duration_ms = 100 + static_cast<int>(detail::below(vrng, 101));
    content.push_back(t);
  }
  const std::size_t n_prone =
      static_cast<std::size_t>(std::llround(spec.prone_fraction * static_cast<double>(spec.vocab_size)));
  std::vector<std::size_t> idx(content.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[detail::below(vrng, i)]);
  SyntheticCorpus out;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto& t = content[idx[k]];
    const bool prone = k < n_prone;
    t.accent_probability = prone ? spec.lexical_correlation : 1.0 - spec.lexical_correlation;
    t.embedding_sign = prone ? 1 : -1;
  }
  for (const auto& t : content) (t.embedding_sign > 0 ? out.prone_words : out.plain_words).push_back(t.word);
  std::vector<detail::WordType> stops;
  for (const auto& s : stop) {
    stops.push_back({s, spec.stopword_accent_probability, 70 + static_cast<int>(detail::below(vrng, 21)), -1});
  }
  std::vector<detail::WordType> forced;
  for (const auto& f : spec.forced_words) {
    forced.push_back({f.word, f.accent_probability, 100 + static_cast<int>(detail::below(vrng, 101)),
                      f.accent_probability >= 0.5 ? 1 : -1});
  }
  std::vector<double> direction(static_cast<std::size_t>(spec.embed_dim));
  for (auto& d : direction) d = detail::bernoulli(vrng, 0.5) ? 1.0 : -1.0;

  // ---- embeddings ----
  out.embeddings = out_dir / "embeddings.txt";
  {
    std::ofstream emb(out.embeddings);
    if (!emb) throw Error(out.embeddings.string() + ": cannot open for writing");
    char buf[32];
    auto write_vec = [&](const detail::WordType& t) {
      emb << t.word;
      for (double d : direction) {
        std::snprintf(buf, sizeof(buf), " %.5f", 0.5 * t.embedding_sign * d + 0.5 * detail::gaussian(vrng));
        emb << buf;
      }
      emb << '\n';
    };
    for (const auto& t : content) write_vec(t);
    for (const auto& t : stops) write_vec(t);
    for (const auto& t : forced) write_vec(t);
  }

  // ---- tokens (depend on seed) ----
  std::mt19937_64 rng(mix_seed(spec.seed, 0x746f6b656eULL));
  struct Token {
    std::string word;
    int duration_ms;
    bool accented;
    bool prominent;
  };
  std::vector<Token> tokens;
  tokens.reserve(spec.n_words);
  for (std::size_t i = 0; i < spec.n_words; ++i) {
    double u = nn::uniform01(rng);
    const detail::WordType* t = nullptr;
    if (u < spec.stopword_share) {
      t = &stops[detail::below(rng, stops.size())];
    } else {
      u -= spec.stopword_share;
      for (std::size_t f = 0; f < forced.size() && !t; ++f) {
        if (u < spec.forced_words[f].token_share) t = &forced[f];
        u -= spec.forced_words[f].token_share;
      }
      if (!t) t = &content[detail::below(rng, content.size())];
    }
    Token tok{t->word, t->duration_ms + static_cast<int>(detail::below(rng, 21)) - 10, false, false};
    tok.accented = detail::bernoulli(rng, t->accent_probability);
    tokens.push_back(tok);
  }
  // Planted OOV tokens at seeded positions; the first oov_accented are accented.
  if (spec.oov_tokens > 0) {
    auto pos = std::vector<std::size_t>(spec.n_words);
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
    for (std::size_t i = 0; i < spec.oov_tokens; ++i) std::swap(pos[i], pos[i + detail::below(rng, pos.size() - i)]);
    for (std::size_t i = 0; i < spec.oov_tokens; ++i) {
      Token& tok = tokens[pos[i]];
      tok.word = detail::oov_word(i);
      tok.duration_ms = 150;
      tok.accented = i < spec.oov_accented;
      out.oov_words.push_back(tok.word);
    }
  }
  for (auto& tok : tokens) {
    tok.prominent = detail::bernoulli(rng, spec.acoustic_strength) ? tok.accented : detail::bernoulli(rng, 0.5);
  }

  // ---- audio and manifest ----
  static const double kSpeakerF0[] = {105.0, 125.0, 190.0, 220.0};
  const int sr = spec.sample_rate;
  const auto ms = [sr](int v) { return static_cast<std::size_t>(v) * static_cast<std::size_t>(sr) / 1000; };
  Corpus corpus;
  corpus.name = spec.name;
  std::size_t next = 0, utt_no = 0;
  while (next < tokens.size()) {
    const int span = spec.max_words_per_utterance - spec.min_words_per_utterance + 1;
    const std::size_t count = std::min(
        tokens.size() - next, static_cast<std::size_t>(spec.min_words_per_utterance) + detail::below(rng, span));
    const int speaker = static_cast<int>(utt_no % static_cast<std::size_t>(spec.speakers));
    const double base_f0 = kSpeakerF0[speaker % 4] * (1.0 + 0.03 * (speaker / 4));
    char id[64];
    std::snprintf(id, sizeof(id), "%s_u%04zu", spec.name.c_str(), utt_no + 1);
    Utterance utt;
    utt.id = id;
    utt.speaker_id = "spk" + std::to_string(speaker + 1);
    utt.audio_path = "audio/" + utt.id + ".wav";

    dsp::SignalBuffer sig;
    sig.sample_rate = sr;
    sig.samples.assign(ms(100), 0.0);
    for (std::size_t k = 0; k < count; ++k) {
      const Token& tok = tokens[next + k];
      if (k > 0) sig.samples.resize(sig.samples.size() + ms(20 + static_cast<int>(detail::below(rng, 41))), 0.0);
      const std::size_t start = sig.samples.size();
      const std::size_t len = ms(tok.duration_ms);
      const double amp = (tok.prominent ? 0.5 : 0.12) * (0.85 + 0.3 * nn::uniform01(rng));
      const double f_lo = base_f0 * (tok.prominent ? 1.3 : 0.95);
      const double f_hi = base_f0 * (tok.prominent ? 1.7 : 0.85);
      const std::size_t ramp = ms(5);
      double phase = 0.0;
      for (std::size_t n = 0; n < len; ++n) {
        const double frac = static_cast<double>(n) / static_cast<double>(len);
        phase += 2.0 * std::numbers::pi * (f_lo + (f_hi - f_lo) * frac) / sr;
        double v = (std::sin(phase) + 0.5 * std::sin(2.0 * phase) + 0.25 * std::sin(3.0 * phase)) / 1.75;
        double env = 1.0;
        if (n < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(n) / ramp);
        if (len - n <= ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(len - n) / ramp);
        sig.samples.push_back(amp * env * v);
      }
      WordToken w;
      w.orthography = tok.word;
      w.start_s = static_cast<double>(start) / sr;
      w.end_s = static_cast<double>(start + len) / sr;
      w.label = tok.accented ? AccentLabel::kAccented : AccentLabel::kNone;
      w.raw_label = tok.accented ? "H*" : "none";
      w.speaker_id = utt.speaker_id;
      w.utterance_id = utt.id;
      w.index_in_utterance = static_cast<int>(k);
      utt.words.push_back(w);
    }
    sig.samples.resize(sig.samples.size() + ms(100), 0.0);
    for (auto& s : sig.samples) s += 0.002 * detail::gaussian(rng);
    dsp::write_wav(out_dir / utt.audio_path, sig);
    corpus.utterances.push_back(std::move(utt));
    next += count;
    ++utt_no;
  }
  out.manifest = out_dir / "manifest.tsv";
  write_manifest(out.manifest, corpus);

  // ---- ground truth ----
  out.designed_accent_rate = designed_accent_rate(spec);
  std::size_t accented = 0, prominent_match = 0;
  for (const auto& t : tokens) {
    accented += t.accented;
    prominent_match += t.accented == t.prominent;
  }
  nlohmann::ordered_json gt;
  gt["name"] = spec.name;
  gt["seed"] = spec.seed;
  gt["vocab_seed"] = spec.vocab_seed;
  gt["n_words"] = spec.n_words;
  gt["lexical_correlation"] = spec.lexical_correlation;
  gt["acoustic_strength"] = spec.acoustic_strength;
  gt["stopword_share"] = spec.stopword_share;
  gt["stopword_accent_probability"] = spec.stopword_accent_probability;
  gt["designed_accent_rate"] = out.designed_accent_rate;
  gt["sampled_accent_rate"] = static_cast<double>(accented) / static_cast<double>(tokens.size());
  gt["accented_tokens"] = accented;
  gt["cue_agreement"] = static_cast<double>(prominent_match) / static_cast<double>(tokens.size());
  gt["utterances"] = corpus.utterances.size();
  gt["prone_words"] = out.prone_words;
  gt["plain_words"] = out.plain_words;
  gt["oov_words"] = out.oov_words;
  nlohmann::ordered_json fw = nlohmann::ordered_json::array();
  for (const auto& f : spec.forced_words) {
    fw.push_back({{"word", f.word}, {"token_share", f.token_share}, {"accent_probability", f.accent_probability}});
  }
  gt["forced_words"] = fw;
  gt["acoustic_rule"] = {{"prominent_amplitude", 0.5},
                         {"plain_amplitude", 0.12},
                         {"prominent_f0_factor", {1.3, 1.7}},
                         {"plain_f0_factor", {0.95, 0.85}}};
  out.ground_truth = out_dir / "ground_truth.json";
  {
    std::ofstream g(out.ground_truth);
    if (!g) throw Error(out.ground_truth.string() + ": cannot open for writing");
    g << gt.dump(2) << '\n';
  }

  ManifestOptions opts;
  opts.name = spec.name;
  out.corpus = load_manifest(out.manifest, opts);
  out.directory = out_dir;
  return out;
}

}  // namespace pitchaccent::harness

#endif  // PITCHACCENT_HARNESS_SYNTHETIC_HPP

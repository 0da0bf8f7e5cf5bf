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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"
#include "pitchaccent/dsp/features.hpp"
#include "pitchaccent/harness/synthetic.hpp"

namespace pitchaccent::harness {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pitchaccent_synth_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.n_words = 400;
  s.embed_dim = 16;
  return s;
}

TEST(SyntheticTest, AccentedWordsAreLouderAtFullStrength) {
  auto spec = small_spec();
  spec.acoustic_strength = 1.0;
  const auto sc = generate_synthetic_corpus(spec, fresh_dir("loud"));
  double db[2] = {0, 0};
  std::size_t n[2] = {0, 0};
  for (const auto& utt : sc.corpus.utterances) {
    const auto sig = dsp::load_wav(utt.resolved_audio_path);
    for (const auto& w : utt.words) {
      const auto a = static_cast<std::size_t>(std::lround(w.start_s * sig.sample_rate));
      const auto b = static_cast<std::size_t>(std::lround(w.end_s * sig.sample_rate));
      const std::span<const double> word(sig.samples.data() + a, b - a);
      const int k = w.label == AccentLabel::kAccented ? 1 : 0;
      db[k] += 20.0 * std::log10(dsp::rms_energy(word));
      ++n[k];
    }
  }
  ASSERT_GT(n[0], 0u);
  ASSERT_GT(n[1], 0u);
  EXPECT_GE(db[1] / static_cast<double>(n[1]) - db[0] / static_cast<double>(n[0]), 6.0);
}

TEST(SyntheticTest, ForcedWordHitsDesignedRate) {
  SyntheticSpec spec = small_spec();
  spec.n_words = 4000;
  spec.forced_words = {{"radio", 0.2, 1.0}};
  const auto sc = generate_synthetic_corpus(spec, fresh_dir("forced"));
  const auto stats = corpus_stats(sc.corpus);
  const double rate = static_cast<double>(stats.accented_count) / static_cast<double>(stats.word_count);
  EXPECT_NEAR(100.0 * rate, 100.0 * sc.designed_accent_rate, 2.0);
  std::size_t radio = 0, radio_accented = 0;
  for (const auto& u : sc.corpus.utterances) {
    for (const auto& w : u.words) {
      if (w.orthography != "radio") continue;
      ++radio;
      radio_accented += w.label == AccentLabel::kAccented;
    }
  }
  EXPECT_NEAR(static_cast<double>(radio) / 4000.0, 0.2, 0.02);
  EXPECT_EQ(radio, radio_accented);
}

TEST(SyntheticTest, FixedSeedIsByteIdentical) {
  const auto spec = small_spec();
  const auto a = generate_synthetic_corpus(spec, fresh_dir("bytes_a"));
  const auto b = generate_synthetic_corpus(spec, fresh_dir("bytes_b"));
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a.directory)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a.directory);
    ASSERT_TRUE(fs::exists(b.directory / rel)) << rel;
    EXPECT_EQ(slurp(entry.path()), slurp(b.directory / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 3u);
}

TEST(SyntheticTest, SharedVocabSeedSharesEmbeddings) {
  auto spec = small_spec();
  const auto a = generate_synthetic_corpus(spec, fresh_dir("vocab_a"));
  spec.seed = 2;
  spec.lexical_correlation = 0.9;
  const auto b = generate_synthetic_corpus(spec, fresh_dir("vocab_b"));
  EXPECT_EQ(slurp(a.embeddings), slurp(b.embeddings));
  EXPECT_EQ(a.prone_words, b.prone_words);
  EXPECT_NE(slurp(a.manifest), slurp(b.manifest));
}

TEST(SyntheticTest, PlantedOovTokens) {
  auto spec = small_spec();
  spec.oov_tokens = 10;
  spec.oov_accented = 5;
  const auto sc = generate_synthetic_corpus(spec, fresh_dir("oov"));
  const auto table = load_embedding_text(sc.embeddings, spec.embed_dim, EmbeddingKind::kGlove);
  const auto r = oov_report(sc.corpus, table);
  EXPECT_EQ(r.oov_tokens, 10u);
  EXPECT_EQ(r.oov_types, 10u);
  EXPECT_DOUBLE_EQ(r.accent_rate(), 0.5);
}

TEST(SyntheticTest, GroundTruthMatchesCorpus) {
  auto spec = small_spec();
  spec.acoustic_strength = 0.6;
  const auto sc = generate_synthetic_corpus(spec, fresh_dir("truth"));
  const auto gt = nlohmann::json::parse(slurp(sc.ground_truth));
  const auto stats = corpus_stats(sc.corpus);
  EXPECT_EQ(stats.word_count, 400u);
  EXPECT_EQ(gt["accented_tokens"].get<std::size_t>(), stats.accented_count);
  EXPECT_EQ(gt["utterances"].get<std::size_t>(), sc.corpus.utterances.size());
  // Cue follows the label with probability 0.6, otherwise a fair coin: 0.6 + 0.4 / 2.
  EXPECT_NEAR(gt["cue_agreement"].get<double>(), 0.8, 0.06);
  for (const auto& u : sc.corpus.utterances) {
    EXPECT_GE(u.words.size(), 5u);
    EXPECT_LE(u.words.size(), 12u);
  }
}

TEST(SyntheticTest, InvalidSpecIsRejected) {
  auto spec = small_spec();
  spec.lexical_correlation = 1.5;
  EXPECT_THROW(generate_synthetic_corpus(spec, fresh_dir("bad")), Error);
  spec = small_spec();
  spec.forced_words = {{"Radio!", 0.1, 1.0}};
  EXPECT_THROW(spec.validate(), Error);
}

}  // namespace
}  // namespace pitchaccent::harness

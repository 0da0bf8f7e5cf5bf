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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "pitchaccent/corpus.hpp"

namespace pitchaccent {
namespace {

namespace fs = std::filesystem;

const char* kHeader = "utterance_id\tspeaker\taudio_path\tword_index\torthography\tstart_s\tend_s\ttobi_label\n";

fs::path write_text(const std::string& name, const std::string& text) {
  const auto dir = fs::temp_directory_path() / "pitchaccent_corpus_test";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path;
}

ManifestOptions no_audio_check() {
  ManifestOptions o;
  o.check_audio_exists = false;
  return o;
}

Utterance utterance_from(std::initializer_list<std::pair<double, double>> times) {
  Utterance u;
  u.id = "u";
  int i = 0;
  for (auto [s, e] : times) {
    WordToken w;
    w.orthography = "w" + std::to_string(i);
    w.start_s = s;
    w.end_s = e;
    w.index_in_utterance = i++;
    u.words.push_back(w);
  }
  return u;
}

dsp::FrameFeatureTrack ramp_track(std::size_t n) {
  dsp::FrameFeatureTrack t;
  t.frames.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.frames[i].fill(static_cast<double>(i));
  return t;
}

TEST(MapTobiLabelTest, Examples) {
  EXPECT_EQ(map_tobi_label("H*"), AccentLabel::kAccented);
  EXPECT_EQ(map_tobi_label("L+H*"), AccentLabel::kAccented);
  EXPECT_EQ(map_tobi_label("!H*"), AccentLabel::kAccented);
  EXPECT_EQ(map_tobi_label("H*?"), AccentLabel::kNone);
  EXPECT_EQ(map_tobi_label("*?"), AccentLabel::kNone);
  EXPECT_EQ(map_tobi_label(""), AccentLabel::kNone);
  EXPECT_EQ(map_tobi_label("none"), AccentLabel::kNone);
}

TEST(MapTobiLabelTest, UnknownMapsToNoneWithWarning) {
  int warnings = 0;
  auto previous = set_log_sink([&](LogLevel level, const std::string&) { warnings += level == LogLevel::kWarning; });
  EXPECT_EQ(map_tobi_label("X%"), AccentLabel::kNone);
  set_log_sink(previous);
  EXPECT_EQ(warnings, 1);
}

TEST(LoadManifestTest, ThreeLineManifest) {
  const auto path = write_text("three.tsv", std::string(kHeader) +
                                                "u1\tspk\tu1.wav\t0\tThe\t0.000\t0.200\t\n"
                                                "u1\tspk\tu1.wav\t1\tradio\t0.200\t0.500\tH*\n"
                                                "u2\tspk\tu2.wav\t0\tstation\t0.100\t0.600\tL+H*\n");
  const Corpus c = load_manifest(path, no_audio_check());
  EXPECT_EQ(c.name, "three");
  EXPECT_EQ(c.word_count(), 3u);
  ASSERT_EQ(c.utterances.size(), 2u);
  EXPECT_EQ(c.utterances[0].words[1].orthography, "radio");
  EXPECT_EQ(c.utterances[0].words[1].label, AccentLabel::kAccented);
  EXPECT_EQ(c.utterances[0].words[0].label, AccentLabel::kNone);
}

TEST(LoadManifestTest, EndBeforeStartNamesLine) {
  const auto path = write_text("bad_time.tsv", std::string(kHeader) +
                                                   "u1\tspk\tu1.wav\t0\tone\t0.000\t0.200\t\n"
                                                   "u1\tspk\tu1.wav\t1\ttwo\t0.300\t0.250\tH*\n");
  try {
    load_manifest(path, no_audio_check());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadManifestTest, StructuralErrors) {
  EXPECT_THROW(load_manifest(write_text("short_row.tsv", std::string(kHeader) + "u1\tspk\tu1.wav\t0\tone\t0.0\n"),
                             no_audio_check()),
               Error);
  EXPECT_THROW(load_manifest(write_text("bad_header.tsv", "utterance_id\tspeaker\n"), no_audio_check()), Error);
  EXPECT_THROW(load_manifest(write_text("overlap.tsv", std::string(kHeader) +
                                                           "u1\tspk\tu1.wav\t0\tone\t0.000\t0.300\t\n"
                                                           "u1\tspk\tu1.wav\t1\ttwo\t0.200\t0.400\t\n"),
                             no_audio_check()),
               Error);
  // Dangling audio path is only detected when checking is on.
  const auto dangling = write_text("dangling.tsv", std::string(kHeader) + "u1\tspk\tmissing.wav\t0\tone\t0.0\t0.1\t\n");
  EXPECT_THROW(load_manifest(dangling), Error);
  EXPECT_NO_THROW(load_manifest(dangling, no_audio_check()));
}

TEST(LoadManifestTest, WriteThenLoadRoundTrip) {
  Corpus c;
  c.name = "rt";
  for (int u = 0; u < 3; ++u) {
    Utterance utt;
    utt.id = "utt" + std::to_string(u);
    utt.speaker_id = "s" + std::to_string(u % 2);
    utt.audio_path = "audio/" + utt.id + ".wav";
    for (int w = 0; w < 4; ++w) {
      WordToken t;
      t.orthography = "word" + std::to_string(w);
      t.start_s = 0.1 + 0.25 * w;
      t.end_s = t.start_s + 0.2;
      t.raw_label = w % 2 ? "H*" : "";
      t.label = map_tobi_label(t.raw_label);
      t.speaker_id = utt.speaker_id;
      t.utterance_id = utt.id;
      t.index_in_utterance = w;
      utt.words.push_back(t);
    }
    c.utterances.push_back(utt);
  }
  std::ostringstream text;
  write_manifest(text, c);
  const Corpus back = load_manifest(write_text("rt.tsv", text.str()), no_audio_check());
  ASSERT_EQ(back.utterances.size(), c.utterances.size());
  for (std::size_t u = 0; u < c.utterances.size(); ++u) {
    EXPECT_EQ(back.utterances[u].audio_path, c.utterances[u].audio_path);
    ASSERT_EQ(back.utterances[u].words.size(), c.utterances[u].words.size());
    for (std::size_t w = 0; w < c.utterances[u].words.size(); ++w) {
      const auto& a = c.utterances[u].words[w];
      const auto& b = back.utterances[u].words[w];
      EXPECT_EQ(a.orthography, b.orthography);
      EXPECT_DOUBLE_EQ(a.start_s, b.start_s);
      EXPECT_DOUBLE_EQ(a.end_s, b.end_s);
      EXPECT_EQ(a.label, b.label);
      EXPECT_EQ(a.speaker_id, b.speaker_id);
      EXPECT_EQ(a.index_in_utterance, b.index_in_utterance);
    }
  }
}

TEST(CorpusStatsTest, MajorityClassArithmetic) {
  const auto large = stats_from_counts(26742, 13780);
  EXPECT_EQ(large.majority_class, AccentLabel::kAccented);
  EXPECT_NEAR(100.0 * large.majority_class_rate, 51.5, 0.05);
  const auto small = stats_from_counts(14651, 6340);
  EXPECT_EQ(small.majority_class, AccentLabel::kNone);
  EXPECT_NEAR(100.0 * small.majority_class_rate, 56.7, 0.05);
  const auto none = stats_from_counts(10, 0);
  EXPECT_EQ(none.majority_class_rate, 1.0);
  EXPECT_THROW(stats_from_counts(0, 0), Error);
}

TEST(CorpusStatsTest, TotalsAreSumsOverUtterances) {
  Corpus c;
  std::mt19937_64 rng(4);
  std::size_t expected_acc = 0, expected_words = 0;
  for (int u = 0; u < 7; ++u) {
    Utterance utt = utterance_from({{0, 0.1}, {0.1, 0.2}, {0.2, 0.3}});
    for (auto& w : utt.words) {
      w.label = rng() % 2 ? AccentLabel::kAccented : AccentLabel::kNone;
      expected_acc += w.label == AccentLabel::kAccented;
      ++expected_words;
    }
    c.utterances.push_back(utt);
  }
  const auto s = corpus_stats(c);
  EXPECT_EQ(s.word_count, expected_words);
  EXPECT_EQ(s.accented_count, expected_acc);
}

TEST(SliceTest, SingleWordUtterance) {
  const auto utt = utterance_from({{0.0, 0.5}});
  const auto slice = slice_word_frames(ramp_track(60), utt, 0);
  ASSERT_EQ(slice.frames.size(), 50u);
  EXPECT_EQ(slice.frames.front()[0], 0.0);
  EXPECT_EQ(slice.frames.back()[0], 49.0);
  EXPECT_EQ(slice.current_span, (FrameSpan{0, 49}));
}

TEST(SliceTest, MiddleWordOfThree) {
  const auto utt = utterance_from({{0.0, 0.2}, {0.2, 0.5}, {0.5, 0.6}});
  const auto slice = slice_word_frames(ramp_track(70), utt, 1);
  ASSERT_EQ(slice.frames.size(), 60u);
  EXPECT_EQ(slice.frames.back()[0], 59.0);
  EXPECT_EQ(slice.current_span, (FrameSpan{20, 49}));
}

TEST(SliceTest, LastWordEndsAtItsEndFrame) {
  const auto utt = utterance_from({{0.0, 0.2}, {0.2, 0.5}, {0.5, 0.6}});
  const auto slice = slice_word_frames(ramp_track(80), utt, 2);
  EXPECT_EQ(slice.frames.front()[0], 20.0);
  EXPECT_EQ(slice.frames.back()[0], 59.0);
  EXPECT_EQ(slice.current_span, (FrameSpan{30, 39}));
}

TEST(SliceTest, WordPastTrackIsClippedWithWarning) {
  const auto utt = utterance_from({{0.0, 0.5}});
  int warnings = 0;
  auto previous = set_log_sink([&](LogLevel level, const std::string&) { warnings += level == LogLevel::kWarning; });
  const auto slice = slice_word_frames(ramp_track(30), utt, 0);
  set_log_sink(previous);
  EXPECT_EQ(slice.frames.size(), 30u);
  EXPECT_EQ(warnings, 1);
}

TEST(InputMatrixTest, IndicatorByConstruction) {
  std::vector<dsp::FeatureVector> frames(10);
  for (std::size_t i = 0; i < frames.size(); ++i) frames[i].fill(1.0 + static_cast<double>(i));
  const auto m = build_input_matrix(frames, {3, 6}, 12);
  const std::vector<double> expected{0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  for (std::size_t c = 0; c < 12; ++c) EXPECT_EQ(m.at(kIndicatorRow, c), expected[c]);
  for (std::size_t c = 10; c < 12; ++c) {
    for (int r = 0; r < kMatrixRows; ++r) EXPECT_EQ(m.at(r, c), 0.0);
  }
  EXPECT_EQ(m.at(2, 4), 5.0);
}

TEST(InputMatrixTest, SingleFrame) {
  std::vector<dsp::FeatureVector> frames(1);
  const auto m = build_input_matrix(frames, {0, 0}, 4);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(m.at(kIndicatorRow, c), c == 0 ? 1.0 : 0.0);
}

TEST(InputMatrixTest, TooManyFramesThrows) {
  std::vector<dsp::FeatureVector> frames(13);
  EXPECT_THROW(build_input_matrix(frames, {0, 1}, 12), Error);
}

TEST(InputMatrixTest, RandomSpansHaveOneRunAndPurePadding) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t s_max = 5 + rng() % 60;
    const std::size_t n = 1 + rng() % s_max;
    std::size_t a = rng() % n, b = rng() % n;
    if (a > b) std::swap(a, b);
    std::vector<dsp::FeatureVector> frames(n);
    for (auto& f : frames) f.fill(0.5);
    const auto m = build_input_matrix(frames, {a, b}, static_cast<int>(s_max));
    double sum = 0.0;
    int runs = 0;
    for (std::size_t c = 0; c < s_max; ++c) {
      const double v = m.at(kIndicatorRow, c);
      ASSERT_TRUE(v == 0.0 || v == 1.0);
      sum += v;
      if (v == 1.0 && (c == 0 || m.at(kIndicatorRow, c - 1) == 0.0)) ++runs;
      if (c >= n) {
        for (int r = 0; r < kMatrixRows; ++r) ASSERT_EQ(m.at(r, c), 0.0);
      }
    }
    EXPECT_EQ(sum, static_cast<double>(b - a + 1));
    EXPECT_EQ(runs, 1);
  }
}

TEST(MaxWindowFramesTest, WidestContextWindow) {
  Corpus c;
  c.utterances.push_back(utterance_from({{0.0, 0.2}, {0.2, 0.5}, {0.5, 0.6}}));
  c.utterances.push_back(utterance_from({{0.0, 0.1}}));
  const std::vector<std::size_t> lengths{70, 20};
  EXPECT_EQ(max_window_frames(c, lengths), 60);
  EXPECT_EQ(max_window_frames(c, lengths, 0), 30);
}

}  // namespace
}  // namespace pitchaccent

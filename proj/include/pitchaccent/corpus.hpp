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

// Time-aligned word corpora and CNN input matrices.
//
// Manifest format (UTF-8, tab separated, one word per row, header required):
//
//   utterance_id speaker audio_path word_index orthography start_s end_s tobi_label
//
// Rows of one utterance are contiguous and ordered by word_index. audio_path
// is resolved relative to the manifest's directory.

#ifndef PITCHACCENT_CORPUS_HPP
#define PITCHACCENT_CORPUS_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/dsp/features.hpp"

namespace pitchaccent {

// Class indices are fixed as (None, Accented) in every vector and file.
enum class AccentLabel : int { kNone = 0, kAccented = 1 };

inline constexpr int kNumClasses = 2;

inline std::string_view to_string(AccentLabel label) {
  return label == AccentLabel::kAccented ? "accented" : "none";
}

struct WordToken {
  std::string orthography;
  double start_s = 0.0;
  double end_s = 0.0;
  AccentLabel label = AccentLabel::kNone;
  std::string raw_label;
  std::string speaker_id;
  std::string utterance_id;
  int index_in_utterance = 0;

  bool operator==(const WordToken&) const = default;
};

struct Utterance {
  std::string id;
  std::string speaker_id;
  std::string audio_path;  // as written in the manifest
  std::filesystem::path resolved_audio_path;
  std::vector<WordToken> words;
};

struct Corpus {
  std::string name;
  std::vector<Utterance> utterances;
  int s_max = 0;

  std::size_t word_count() const {
    std::size_t n = 0;
    for (const auto& u : utterances) n += u.words.size();
    return n;
  }
};

// Flat word id <-> (utterance, position) mapping in manifest order.
struct WordRef {
  std::size_t utterance = 0;
  std::size_t word = 0;
};

inline std::vector<WordRef> flatten_words(const Corpus& corpus) {
  std::vector<WordRef> refs;
  refs.reserve(corpus.word_count());
  for (std::size_t u = 0; u < corpus.utterances.size(); ++u) {
    for (std::size_t w = 0; w < corpus.utterances[u].words.size(); ++w) refs.push_back({u, w});
  }
  return refs;
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

inline bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

inline bool parse_int(const std::string& s, int& out) {
  const std::string t = trim(s);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

// Shortest fixed-point rendering with at least three decimals that parses back exactly.
inline std::string format_seconds(double v) {
  char buf[64];
  for (int prec = 3; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Collapses a ToBI accent field to the binary target. Unsure marks (a trailing
// '?') fold into None, as do empty fields and anything without a '*'.
inline AccentLabel map_tobi_label(std::string_view raw) {
  const std::string label = detail::trim(raw);
  if (label.empty()) return AccentLabel::kNone;
  const std::string folded = detail::lower(label);
  if (folded == "none" || folded == "0" || folded == "-") return AccentLabel::kNone;
  if (label.back() == '?') return AccentLabel::kNone;
  if (label.find('*') != std::string::npos) return AccentLabel::kAccented;
  log_warning("unknown ToBI label '" + label + "' mapped to none");
  return AccentLabel::kNone;
}

inline constexpr std::array<std::string_view, 8> kManifestColumns = {
    "utterance_id", "speaker", "audio_path", "word_index", "orthography", "start_s", "end_s", "tobi_label"};

struct ManifestOptions {
  bool check_audio_exists = true;
  std::string name;  // defaults to the manifest file stem
};

inline Corpus load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open manifest");
  const std::filesystem::path base = path.parent_path();
  auto fail = [&](std::size_t line_no, const std::string& what) {
    throw Error(path.string() + ": line " + std::to_string(line_no) + ": " + what);
  };

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) fail(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_tabs(line);
  if (header.size() != kManifestColumns.size()) {
    fail(1, "expected " + std::to_string(kManifestColumns.size()) + " columns in header, got " +
                std::to_string(header.size()));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (detail::trim(header[i]) != kManifestColumns[i]) {
      fail(1, "missing column '" + std::string(kManifestColumns[i]) + "'");
    }
  }

  Corpus corpus;
  corpus.name = options.name.empty() ? path.stem().string() : options.name;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_tabs(line);
    if (f.size() != kManifestColumns.size()) {
      fail(line_no, "missing column: expected " + std::to_string(kManifestColumns.size()) + " fields, got " +
                        std::to_string(f.size()));
    }
    WordToken tok;
    tok.utterance_id = detail::trim(f[0]);
    tok.speaker_id = detail::trim(f[1]);
    const std::string audio = detail::trim(f[2]);
    tok.orthography = detail::trim(f[4]);
    tok.raw_label = detail::trim(f[7]);
    if (tok.utterance_id.empty()) fail(line_no, "empty utterance_id");
    if (audio.empty()) fail(line_no, "empty audio_path");
    if (tok.orthography.empty()) fail(line_no, "empty orthography");
    if (!detail::parse_int(f[3], tok.index_in_utterance)) fail(line_no, "bad word_index '" + f[3] + "'");
    if (!detail::parse_double(f[5], tok.start_s)) fail(line_no, "bad start_s '" + f[5] + "'");
    if (!detail::parse_double(f[6], tok.end_s)) fail(line_no, "bad end_s '" + f[6] + "'");
    if (tok.start_s < 0.0) fail(line_no, "negative start_s");
    if (!(tok.end_s > tok.start_s)) fail(line_no, "end_s must be greater than start_s");
    tok.label = map_tobi_label(tok.raw_label);

    if (corpus.utterances.empty() || corpus.utterances.back().id != tok.utterance_id) {
      for (const auto& u : corpus.utterances) {
        if (u.id == tok.utterance_id) fail(line_no, "rows of utterance '" + tok.utterance_id + "' are not contiguous");
      }
      Utterance utt;
      utt.id = tok.utterance_id;
      utt.speaker_id = tok.speaker_id;
      utt.audio_path = audio;
      utt.resolved_audio_path = std::filesystem::path(audio).is_absolute() ? std::filesystem::path(audio) : base / audio;
      if (options.check_audio_exists && !std::filesystem::exists(utt.resolved_audio_path)) {
        fail(line_no, "dangling audio path '" + audio + "'");
      }
      corpus.utterances.push_back(std::move(utt));
    }
    Utterance& utt = corpus.utterances.back();
    if (audio != utt.audio_path) fail(line_no, "audio_path differs within utterance '" + utt.id + "'");
    if (tok.index_in_utterance != static_cast<int>(utt.words.size())) {
      fail(line_no, "word_index " + std::to_string(tok.index_in_utterance) + " out of sequence (expected " +
                        std::to_string(utt.words.size()) + ")");
    }
    if (!utt.words.empty()) {
      const WordToken& prev = utt.words.back();
      if (tok.start_s < prev.start_s) fail(line_no, "non-monotone times: start_s before previous word");
      if (tok.start_s < prev.end_s - 1e-9) fail(line_no, "non-monotone times: word overlaps previous word");
    }
    utt.words.push_back(std::move(tok));
  }
  return corpus;
}

inline void write_manifest(std::ostream& out, const Corpus& corpus) {
  for (std::size_t i = 0; i < kManifestColumns.size(); ++i) out << (i ? "\t" : "") << kManifestColumns[i];
  out << '\n';
  for (const auto& utt : corpus.utterances) {
    for (const auto& w : utt.words) {
      out << w.utterance_id << '\t' << w.speaker_id << '\t' << utt.audio_path << '\t' << w.index_in_utterance << '\t'
          << w.orthography << '\t' << detail::format_seconds(w.start_s) << '\t' << detail::format_seconds(w.end_s)
          << '\t' << w.raw_label << '\n';
    }
  }
}

inline void write_manifest(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_manifest(out, corpus);
}

struct CorpusStats {
  std::size_t word_count = 0;
  std::size_t accented_count = 0;
  double majority_class_rate = 0.0;  // fraction in [0.5, 1]
  AccentLabel majority_class = AccentLabel::kNone;
};

inline CorpusStats stats_from_counts(std::size_t words, std::size_t accented) {
  if (words == 0) throw Error("corpus_stats: empty corpus");
  CorpusStats s;
  s.word_count = words;
  s.accented_count = accented;
  const std::size_t none = words - accented;
  s.majority_class = accented > none ? AccentLabel::kAccented : AccentLabel::kNone;
  s.majority_class_rate = static_cast<double>(std::max(accented, none)) / static_cast<double>(words);
  return s;
}

inline CorpusStats corpus_stats(const Corpus& corpus) {
  std::size_t words = 0, accented = 0;
  for (const auto& u : corpus.utterances) {
    for (const auto& w : u.words) {
      ++words;
      accented += w.label == AccentLabel::kAccented ? 1 : 0;
    }
  }
  return stats_from_counts(words, accented);
}

inline std::string format_stats(const std::string& name, const CorpusStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %8zu %8zu %5.1f%% %s", name.c_str(), s.word_count, s.accented_count,
                100.0 * s.majority_class_rate, std::string(to_string(s.majority_class)).c_str());
  return buf;
}

// ---------------------------------------------------------------------------
// Frame slicing and input matrices.

inline constexpr int kMatrixRows = dsp::kNumDescriptors + 1;  // descriptors + position indicator
inline constexpr int kIndicatorRow = dsp::kNumDescriptors;

// Frame index of time t on the 10 ms grid. The epsilon absorbs decimal
// representation error (0.29 * 100 == 28.999999999999996).
inline std::size_t time_to_frame(double t_seconds) {
  return static_cast<std::size_t>(std::floor(t_seconds * (1000.0 / dsp::kHopMs) + 1e-9));
}

struct FrameSpan {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive

  std::size_t length() const { return last - first + 1; }
  bool operator==(const FrameSpan&) const = default;
};

// Absolute frame range of one word, clipped to the track.
inline FrameSpan word_frames(const WordToken& w, std::size_t track_length, bool warn = true) {
  if (track_length == 0) throw Error("empty feature track");
  std::size_t first = time_to_frame(w.start_s);
  std::size_t end = time_to_frame(w.end_s);
  std::size_t last = end > first ? end - 1 : first;
  if (last >= track_length) {
    if (warn) {
      log_warning("word '" + w.orthography + "' in " + w.utterance_id + " extends past the feature track; clipped");
    }
    last = track_length - 1;
    first = std::min(first, last);
  }
  return {first, last};
}

struct WordWindow {
  FrameSpan window;   // absolute frames of the context window
  FrameSpan current;  // current word, relative to window.first
};

inline WordWindow word_window(std::size_t track_length, const Utterance& utt, std::size_t word_index,
                              int context = 1, bool warn = true) {
  if (word_index >= utt.words.size()) throw Error("word index out of range in " + utt.id);
  const std::size_t ctx = static_cast<std::size_t>(std::max(context, 0));
  const std::size_t left = word_index >= ctx ? word_index - ctx : 0;
  const std::size_t right = std::min(utt.words.size() - 1, word_index + ctx);
  const FrameSpan cur = word_frames(utt.words[word_index], track_length, warn);
  const FrameSpan lo = left == word_index ? cur : word_frames(utt.words[left], track_length, false);
  const FrameSpan hi = right == word_index ? cur : word_frames(utt.words[right], track_length, false);
  WordWindow out;
  out.window = {std::min(lo.first, cur.first), std::max(hi.last, cur.last)};
  out.current = {cur.first - out.window.first, cur.last - out.window.first};
  return out;
}

struct WordSlice {
  std::vector<dsp::FeatureVector> frames;
  FrameSpan current_span;
};

inline WordSlice slice_word_frames(const dsp::FrameFeatureTrack& track, const Utterance& utt, std::size_t word_index,
                                   int context = 1) {
  const WordWindow ww = word_window(track.size(), utt, word_index, context);
  WordSlice slice;
  slice.frames.assign(track.frames.begin() + static_cast<std::ptrdiff_t>(ww.window.first),
                      track.frames.begin() + static_cast<std::ptrdiff_t>(ww.window.last + 1));
  slice.current_span = ww.current;
  return slice;
}

// (d + 1) x s_max, row-major: rows 0..5 descriptors, row 6 position indicator.
struct InputMatrix {
  int s_max = 0;
  std::size_t frame_count = 0;
  FrameSpan current_span;
  std::vector<double> values;

  double at(int row, std::size_t col) const { return values[static_cast<std::size_t>(row) * s_max + col]; }
  double& at(int row, std::size_t col) { return values[static_cast<std::size_t>(row) * s_max + col]; }
};

inline InputMatrix build_input_matrix(std::span<const dsp::FeatureVector> frames, FrameSpan current_span, int s_max) {
  if (s_max <= 0) throw Error("build_input_matrix: s_max must be positive");
  if (frames.empty()) throw Error("build_input_matrix: no frames");
  if (frames.size() > static_cast<std::size_t>(s_max)) {
    throw Error("build_input_matrix: " + std::to_string(frames.size()) + " frames exceed s_max " +
                std::to_string(s_max));
  }
  if (current_span.first > current_span.last || current_span.last >= frames.size()) {
    throw Error("build_input_matrix: current span outside the window");
  }
  InputMatrix m;
  m.s_max = s_max;
  m.frame_count = frames.size();
  m.current_span = current_span;
  m.values.assign(static_cast<std::size_t>(kMatrixRows) * s_max, 0.0);
  for (std::size_t c = 0; c < frames.size(); ++c) {
    for (int r = 0; r < dsp::kNumDescriptors; ++r) m.at(r, c) = frames[c][static_cast<std::size_t>(r)];
  }
  for (std::size_t c = current_span.first; c <= current_span.last; ++c) m.at(kIndicatorRow, c) = 1.0;
  return m;
}

// Largest context-window frame count over every word of the corpus.
// track_lengths[u] is the frame count of utterance u's feature track.
inline int max_window_frames(const Corpus& corpus, std::span<const std::size_t> track_lengths, int context = 1) {
  if (track_lengths.size() != corpus.utterances.size()) throw Error("max_window_frames: track count mismatch");
  std::size_t best = 0;
  for (std::size_t u = 0; u < corpus.utterances.size(); ++u) {
    const auto& utt = corpus.utterances[u];
    for (std::size_t w = 0; w < utt.words.size(); ++w) {
      best = std::max(best, word_window(track_lengths[u], utt, w, context, false).window.length());
    }
  }
  return static_cast<int>(best);
}

}  // namespace pitchaccent

#endif  // PITCHACCENT_CORPUS_HPP

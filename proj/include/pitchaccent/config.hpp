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

// Run configuration (key=value text whose keys are the CLI flag names) and
// content hashes recorded with every run.

#ifndef PITCHACCENT_CONFIG_HPP
#define PITCHACCENT_CONFIG_HPP

#include <openssl/evp.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pitchaccent/common.hpp"

namespace pitchaccent {

struct RunConfig {
  std::string command;
  std::vector<std::string> manifest;  // PATH or NAME=PATH
  std::string embeddings;
  std::string embedding_kind = "glove";
  int embedding_dim = 300;
  std::string mode = "acoustic";
  int ngram = 1;
  int bottleneck = 10;
  std::uint64_t seed = 1;
  std::string out = "run";
  int jobs = 1;
  int epochs = 20;
  int reps = 5;
  int folds = 10;
  int dev_size = 1000;
  int batch_size = 32;
  double lr = 1e-3;
  double l2_acoustic = 1e-4;
  double l2_lexical = 1e-4;
  bool depthwise = false;
  int s_max = 0;  // 0 = derived from the corpora
  int precision = 64;
  std::vector<std::string> source;
  std::string target;
  int fold = 0;
  // synth
  std::string name = "synthetic";
  int words = 2000;
  int vocab_size = 60;
  std::uint64_t vocab_seed = 1;
  double lexical_correlation = 0.5;
  double acoustic_strength = 1.0;
  double stopword_share = 0.15;
  int oov_tokens = 0;
  int oov_accented = 0;

  void validate() const {
    if (embedding_dim < 1) throw Error("config: embedding-dim must be >= 1");
    if (ngram != 1 && ngram != 3) throw Error("config: ngram must be 1 or 3");
    if (bottleneck < 1) throw Error("config: bottleneck must be >= 1");
    if (jobs < 1) throw Error("config: jobs must be >= 1");
    if (epochs < 1 || reps < 1 || folds < 2) throw Error("config: epochs, reps must be >= 1 and folds >= 2");
    if (dev_size < 1 || batch_size < 1) throw Error("config: dev-size and batch-size must be >= 1");
    if (!(lr > 0.0)) throw Error("config: lr must be > 0");
    if (l2_acoustic < 0.0 || l2_lexical < 0.0) throw Error("config: l2 coefficients must be >= 0");
    if (precision != 32 && precision != 64) throw Error("config: precision must be 32 or 64");
    if (s_max < 0) throw Error("config: s-max must be >= 0");
    if (fold < 0 || fold >= folds) throw Error("config: fold must lie in [0, folds)");
  }
};

namespace detail {

inline std::string join(const std::vector<std::string>& v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : std::string()) + v[i];
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Ordered (key, value) pairs; keys equal the long flag names.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  using detail::fmt_double;
  return {
      {"command", c.command},
      {"manifest", detail::join(c.manifest)},
      {"embeddings", c.embeddings},
      {"embedding-kind", c.embedding_kind},
      {"embedding-dim", std::to_string(c.embedding_dim)},
      {"mode", c.mode},
      {"ngram", std::to_string(c.ngram)},
      {"bottleneck", std::to_string(c.bottleneck)},
      {"seed", std::to_string(c.seed)},
      {"out", c.out},
      {"jobs", std::to_string(c.jobs)},
      {"epochs", std::to_string(c.epochs)},
      {"reps", std::to_string(c.reps)},
      {"folds", std::to_string(c.folds)},
      {"dev-size", std::to_string(c.dev_size)},
      {"batch-size", std::to_string(c.batch_size)},
      {"lr", fmt_double(c.lr)},
      {"l2-acoustic", fmt_double(c.l2_acoustic)},
      {"l2-lexical", fmt_double(c.l2_lexical)},
      {"depthwise", c.depthwise ? "true" : "false"},
      {"s-max", std::to_string(c.s_max)},
      {"precision", std::to_string(c.precision)},
      {"source", detail::join(c.source)},
      {"target", c.target},
      {"fold", std::to_string(c.fold)},
      {"name", c.name},
      {"words", std::to_string(c.words)},
      {"vocab-size", std::to_string(c.vocab_size)},
      {"vocab-seed", std::to_string(c.vocab_seed)},
      {"lexical-correlation", fmt_double(c.lexical_correlation)},
      {"acoustic-strength", fmt_double(c.acoustic_strength)},
      {"stopword-share", fmt_double(c.stopword_share)},
      {"oov-tokens", std::to_string(c.oov_tokens)},
      {"oov-accented", std::to_string(c.oov_accented)},
  };
}

inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  auto to_int = [&](int& dst) {
    std::size_t pos = 0;
    try {
      dst = std::stoi(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size() || value.empty()) throw Error("config: " + key + " expects an integer, got '" + value + "'");
  };
  auto to_u64 = [&](std::uint64_t& dst) {
    std::size_t pos = 0;
    try {
      dst = std::stoull(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size() || value.empty() || value[0] == '-') {
      throw Error("config: " + key + " expects a non-negative integer, got '" + value + "'");
    }
  };
  auto to_double = [&](double& dst) {
    std::size_t pos = 0;
    try {
      dst = std::stod(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size() || value.empty()) throw Error("config: " + key + " expects a number, got '" + value + "'");
  };
  if (key == "command") c.command = value;
  else if (key == "manifest") c.manifest = detail::split_list(value);
  else if (key == "embeddings") c.embeddings = value;
  else if (key == "embedding-kind") c.embedding_kind = value;
  else if (key == "embedding-dim") to_int(c.embedding_dim);
  else if (key == "mode") c.mode = value;
  else if (key == "ngram") to_int(c.ngram);
  else if (key == "bottleneck") to_int(c.bottleneck);
  else if (key == "seed") to_u64(c.seed);
  else if (key == "out") c.out = value;
  else if (key == "jobs") to_int(c.jobs);
  else if (key == "epochs") to_int(c.epochs);
  else if (key == "reps") to_int(c.reps);
  else if (key == "folds") to_int(c.folds);
  else if (key == "dev-size") to_int(c.dev_size);
  else if (key == "batch-size") to_int(c.batch_size);
  else if (key == "lr") to_double(c.lr);
  else if (key == "l2-acoustic") to_double(c.l2_acoustic);
  else if (key == "l2-lexical") to_double(c.l2_lexical);
  else if (key == "depthwise") {
    if (value != "true" && value != "false") throw Error("config: depthwise expects true or false");
    c.depthwise = value == "true";
  } else if (key == "s-max") to_int(c.s_max);
  else if (key == "precision") to_int(c.precision);
  else if (key == "source") c.source = detail::split_list(value);
  else if (key == "target") c.target = value;
  else if (key == "fold") to_int(c.fold);
  else if (key == "name") c.name = value;
  else if (key == "words") to_int(c.words);
  else if (key == "vocab-size") to_int(c.vocab_size);
  else if (key == "vocab-seed") to_u64(c.vocab_seed);
  else if (key == "lexical-correlation") to_double(c.lexical_correlation);
  else if (key == "acoustic-strength") to_double(c.acoustic_strength);
  else if (key == "stopword-share") to_double(c.stopword_share);
  else if (key == "oov-tokens") to_int(c.oov_tokens);
  else if (key == "oov-accented") to_int(c.oov_accented);
  else throw Error("config: unknown key '" + key + "'");
}

inline std::string format_config(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + "=" + v + "\n";
  return out;
}

// key=value lines; blank lines and lines starting with '#' are ignored.
inline void parse_config_text(RunConfig& c, std::istream& in, const std::string& origin = "<config>") {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(origin + ": line " + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    try {
      set_config_value(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(origin + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline void load_config_file(RunConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open config file");
  parse_config_text(c, in, path.string());
}

// ---- hashing ----

inline std::string sha1_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) throw Error("SHA-1 failed");
  static const char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

// Same id git assigns to a blob with this content.
inline std::string git_blob_hash(std::string_view content) {
  std::string data = "blob " + std::to_string(content.size());
  data.push_back('\0');
  data.append(content);
  return sha1_hex(data);
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open for hashing");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::string git_blob_hash_file(const std::filesystem::path& path) { return git_blob_hash(read_file_bytes(path)); }

// Hash of every setting that can change results (out and jobs excluded).
inline std::string config_hash(const RunConfig& c) {
  std::string text;
  for (const auto& [k, v] : config_entries(c)) {
    if (k == "out" || k == "jobs") continue;
    text += k + "=" + v + "\n";
  }
  return sha1_hex(text);
}

struct InputHash {
  std::vector<std::pair<std::string, std::string>> files;  // (path, blob hash), sorted by path
  std::string combined;                                    // SHA-1 over "<blob> <path>\n" lines
};

inline InputHash hash_inputs(std::vector<std::filesystem::path> paths) {
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  InputHash h;
  std::string listing;
  for (const auto& p : paths) {
    h.files.emplace_back(p.generic_string(), git_blob_hash_file(p));
    listing += h.files.back().second + " " + h.files.back().first + "\n";
  }
  h.combined = sha1_hex(listing);
  return h;
}

}  // namespace pitchaccent

#endif  // PITCHACCENT_CONFIG_HPP

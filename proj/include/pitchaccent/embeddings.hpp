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

// Pre-trained word embedding tables and lexical input vectors.

#ifndef PITCHACCENT_EMBEDDINGS_HPP
#define PITCHACCENT_EMBEDDINGS_HPP

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/corpus.hpp"

namespace pitchaccent {

enum class EmbeddingKind { kGlove, kWord2Vec };

inline EmbeddingKind parse_embedding_kind(std::string_view s) {
  if (s == "glove") return EmbeddingKind::kGlove;
  if (s == "w2v" || s == "word2vec") return EmbeddingKind::kWord2Vec;
  throw Error("unknown embedding kind '" + std::string(s) + "' (expected glove or w2v)");
}

inline std::string_view to_string(EmbeddingKind k) { return k == EmbeddingKind::kGlove ? "glove" : "w2v"; }

inline constexpr int kDefaultEmbeddingDim = 300;
inline constexpr std::string_view kEmptyToken = "<empty>";

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int dim, EmbeddingKind kind) : dim_(dim), kind_(kind) {
    if (dim <= 0) throw Error("embedding dimension must be positive");
  }

  int dim() const { return dim_; }
  EmbeddingKind kind() const { return kind_; }
  std::size_t size() const { return entries_.size(); }

  bool contains(const std::string& token) const { return entries_.count(token) != 0; }

  // First occurrence wins. Returns false if the token was already present.
  bool insert(const std::string& token, std::vector<double> vector) {
    if (token.empty()) throw Error("embedding token must be non-empty");
    if (static_cast<int>(vector.size()) != dim_) {
      throw Error("embedding for '" + token + "' has length " + std::to_string(vector.size()) + ", expected " +
                  std::to_string(dim_));
    }
    return entries_.emplace(token, std::move(vector)).second;
  }

  bool erase(const std::string& token) { return entries_.erase(token) != 0; }

  const std::vector<double>* find(const std::string& token) const {
    const auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
  }

 private:
  int dim_ = kDefaultEmbeddingDim;
  EmbeddingKind kind_ = EmbeddingKind::kGlove;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

// glove: "token v1 ... vdim" per line.
// w2v text: the same after a "count dim" header line.
inline EmbeddingTable load_embedding_text(std::istream& in, int dim, EmbeddingKind kind,
                                          const std::string& origin = "<stream>") {
  EmbeddingTable table(dim, kind);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(origin + ": line " + std::to_string(line_no) + ": " + what);
  };
  if (kind == EmbeddingKind::kWord2Vec) {
    ++line_no;
    if (!std::getline(in, line)) fail("missing word2vec header");
    std::istringstream header(line);
    long count = 0, header_dim = 0;
    if (!(header >> count >> header_dim)) fail("malformed word2vec header '" + line + "'");
    if (header_dim != dim) fail("header dimension " + std::to_string(header_dim) + " != " + std::to_string(dim));
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const char* p = line.c_str();
    while (*p == ' ' || *p == '\t') ++p;
    const char* token_end = p;
    while (*token_end && *token_end != ' ' && *token_end != '\t') ++token_end;
    std::string token(p, token_end);
    values.clear();
    p = token_end;
    while (true) {
      while (*p == ' ' || *p == '\t') ++p;
      if (!*p) break;
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) fail("non-numeric value in vector for '" + token + "'");
      values.push_back(v);
      p = end;
    }
    if (static_cast<int>(values.size()) != dim) {
      fail("expected " + std::to_string(dim) + " values, got " + std::to_string(values.size()));
    }
    table.insert(token, values);
  }
  return table;
}

inline EmbeddingTable load_embedding_text(const std::filesystem::path& path, int dim, EmbeddingKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open embedding file");
  return load_embedding_text(in, dim, kind, path.string());
}

// Lowercases, drops characters outside [a-z'-], keeps the last component of a
// hyphenated word and the part before an apostrophe. The result is the only
// candidate; "<empty>" when nothing survives.
inline std::vector<std::string> normalize_word(std::string_view raw) {
  std::string cleaned;
  for (char ch : raw) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if ((c >= 'a' && c <= 'z') || c == '\'' || c == '-') cleaned.push_back(c);
  }
  // Hyphen: last non-empty component.
  std::string part;
  {
    std::string current;
    for (char c : cleaned) {
      if (c == '-') {
        if (!current.empty()) part = current;
        current.clear();
      } else {
        current.push_back(c);
      }
    }
    if (!current.empty()) part = current;
  }
  // Apostrophe: the part before it, or after it for leading elisions ('em).
  std::string token;
  const std::size_t apos = part.find('\'');
  if (apos == std::string::npos) {
    token = part;
  } else if (apos > 0) {
    token = part.substr(0, apos);
  } else {
    for (char c : part.substr(1)) {
      if (c == '\'') break;
      token.push_back(c);
    }
  }
  if (token.empty()) token = kEmptyToken;
  return {token};
}

inline std::string normalized_token(std::string_view raw) { return normalize_word(raw).front(); }

// Stored vector, or all ones for out-of-vocabulary tokens.
inline std::vector<double> lookup(const EmbeddingTable& table, const std::string& token) {
  if (const auto* v = table.find(token)) return *v;
  return std::vector<double>(static_cast<std::size_t>(table.dim()), 1.0);
}

struct LexicalInput {
  std::vector<double> vector;
  int n_words = 1;
};

// n = 1: the current word. n = 3: left, current, right; zero blocks where the
// utterance has no neighbour.
inline LexicalInput ngram_vectors(const Utterance& utt, std::size_t word_index, int n, const EmbeddingTable& table) {
  if (n != 1 && n != 3) throw Error("ngram_vectors: n must be 1 or 3");
  if (word_index >= utt.words.size()) throw Error("ngram_vectors: word index out of range");
  const auto dim = static_cast<std::size_t>(table.dim());
  LexicalInput out;
  out.n_words = n;
  out.vector.assign(dim * static_cast<std::size_t>(n), 0.0);
  auto put = [&](std::size_t block, std::size_t w) {
    const auto v = lookup(table, normalized_token(utt.words[w].orthography));
    std::copy(v.begin(), v.end(), out.vector.begin() + static_cast<std::ptrdiff_t>(block * dim));
  };
  if (n == 1) {
    put(0, word_index);
  } else {
    if (word_index > 0) put(0, word_index - 1);
    put(1, word_index);
    if (word_index + 1 < utt.words.size()) put(2, word_index + 1);
  }
  return out;
}

using StopwordSet = std::set<std::string>;

inline StopwordSet default_stopwords() { return {"a", "and", "of", "to"}; }

inline bool is_stopword(std::string_view orthography, const StopwordSet& stopwords) {
  return stopwords.count(normalized_token(orthography)) != 0;
}

// One flag per word, in flatten_words order.
inline std::vector<bool> stopword_mask(const Corpus& corpus, const StopwordSet& stopwords = default_stopwords()) {
  std::vector<bool> mask;
  mask.reserve(corpus.word_count());
  for (const auto& u : corpus.utterances) {
    for (const auto& w : u.words) mask.push_back(is_stopword(w.orthography, stopwords));
  }
  return mask;
}

struct OovReport {
  std::size_t oov_tokens = 0;
  std::size_t oov_types = 0;
  std::size_t oov_accented = 0;
  std::size_t stopword_oov_tokens = 0;
  std::size_t stopword_oov_accented = 0;
  std::size_t other_oov_tokens = 0;
  std::size_t other_oov_accented = 0;

  static double rate(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  }
  double accent_rate() const { return rate(oov_accented, oov_tokens); }
  double stopword_rate() const { return rate(stopword_oov_tokens, oov_tokens); }
  double stopword_accent_rate() const { return rate(stopword_oov_accented, stopword_oov_tokens); }
  double other_accent_rate() const { return rate(other_oov_accented, other_oov_tokens); }
};

inline OovReport oov_report(const Corpus& corpus, const EmbeddingTable& table,
                            const StopwordSet& stopwords = default_stopwords()) {
  OovReport r;
  std::unordered_set<std::string> types;
  for (const auto& u : corpus.utterances) {
    for (const auto& w : u.words) {
      const std::string token = normalized_token(w.orthography);
      if (table.contains(token)) continue;
      const bool accented = w.label == AccentLabel::kAccented;
      ++r.oov_tokens;
      r.oov_accented += accented;
      types.insert(token);
      if (stopwords.count(token)) {
        ++r.stopword_oov_tokens;
        r.stopword_oov_accented += accented;
      } else {
        ++r.other_oov_tokens;
        r.other_oov_accented += accented;
      }
    }
  }
  r.oov_types = types.size();
  return r;
}

inline std::string format_oov_report(const std::string& corpus_name, EmbeddingKind kind, const OovReport& r) {
  std::ostringstream out;
  char buf[128];
  out << "corpus: " << corpus_name << '\n';
  out << "embeddings: " << to_string(kind) << '\n';
  out << "tokens: " << r.oov_tokens << '\n';
  out << "types: " << r.oov_types << '\n';
  std::snprintf(buf, sizeof(buf), "accent rate: %.1f%%\n", 100.0 * r.accent_rate());
  out << buf;
  std::snprintf(buf, sizeof(buf), "stopword rate: %.1f%%\n", 100.0 * r.stopword_rate());
  out << buf;
  std::snprintf(buf, sizeof(buf), "accented stopwords: %.1f%%\n", 100.0 * r.stopword_accent_rate());
  out << buf;
  std::snprintf(buf, sizeof(buf), "accented remaining: %.1f%%\n", 100.0 * r.other_accent_rate());
  out << buf;
  return out.str();
}

}  // namespace pitchaccent

#endif  // PITCHACCENT_EMBEDDINGS_HPP

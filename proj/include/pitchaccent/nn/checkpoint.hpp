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

// Versioned text checkpoint of named tensors.
//
//   pitchaccent-checkpoint 1
//   seed <u64>
//   config_hash <hex>
//   tensors <count>
//   tensor <name> <rank> <d0> ... <dn>
//   <row-major values, %.17g, one line>
//   ...

#ifndef PITCHACCENT_NN_CHECKPOINT_HPP
#define PITCHACCENT_NN_CHECKPOINT_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/nn/tensor.hpp"

namespace pitchaccent::nn {

inline constexpr int kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor<double> value;
};

struct Checkpoint {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<NamedTensor> tensors;

  const Tensor<double>* find(const std::string& name) const {
    for (const auto& t : tensors) {
      if (t.name == name) return &t.value;
    }
    return nullptr;
  }
};

inline void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << "pitchaccent-checkpoint " << kCheckpointVersion << '\n';
  out << "seed " << ckpt.seed << '\n';
  out << "config_hash " << (ckpt.config_hash.empty() ? "-" : ckpt.config_hash) << '\n';
  out << "tensors " << ckpt.tensors.size() << '\n';
  char buf[32];
  for (const auto& t : ckpt.tensors) {
    if (t.name.empty() || t.name.find_first_of(" \t\n") != std::string::npos) {
      throw Error("checkpoint tensor names must be non-empty and contain no whitespace");
    }
    out << "tensor " << t.name << ' ' << t.value.rank();
    for (auto d : t.value.shape()) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < t.value.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", t.value[i]);
      out << (i ? " " : "") << buf;
    }
    out << '\n';
  }
}

inline Checkpoint read_checkpoint(std::istream& in, const std::string& origin = "<stream>") {
  auto fail = [&](const std::string& what) { throw Error(origin + ": " + what); };
  std::string magic, key;
  int version = 0;
  if (!(in >> magic >> version) || magic != "pitchaccent-checkpoint") fail("not a checkpoint file");
  if (version != kCheckpointVersion) fail("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  std::size_t count = 0;
  if (!(in >> key >> ckpt.seed) || key != "seed") fail("missing seed");
  if (!(in >> key >> ckpt.config_hash) || key != "config_hash") fail("missing config_hash");
  if (ckpt.config_hash == "-") ckpt.config_hash.clear();
  if (!(in >> key >> count) || key != "tensors") fail("missing tensor count");
  for (std::size_t t = 0; t < count; ++t) {
    NamedTensor nt;
    std::size_t rank = 0;
    if (!(in >> key >> nt.name >> rank) || key != "tensor") fail("malformed tensor header");
    Shape shape(rank);
    for (auto& d : shape) {
      if (!(in >> d)) fail("malformed shape for " + nt.name);
    }
    nt.value = Tensor<double>(shape);
    for (std::size_t i = 0; i < nt.value.size(); ++i) {
      if (!(in >> nt.value[i])) fail("truncated values for " + nt.name);
    }
    ckpt.tensors.push_back(std::move(nt));
  }
  return ckpt;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_checkpoint(out, ckpt);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open checkpoint");
  return read_checkpoint(in, path.string());
}

}  // namespace pitchaccent::nn

#endif  // PITCHACCENT_NN_CHECKPOINT_HPP

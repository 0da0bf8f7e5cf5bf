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

// RIFF/WAVE PCM-16 mono reader and writer.

#ifndef PITCHACCENT_DSP_WAV_HPP
#define PITCHACCENT_DSP_WAV_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "pitchaccent/common.hpp"

namespace pitchaccent::dsp {

struct SignalBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void put_u16le(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace detail

// Decodes an in-memory WAV image. Samples are divided by 32768.
inline SignalBuffer decode_wav(std::span<const unsigned char> bytes, const std::string& origin = "<memory>") {
  auto fail = [&](const std::string& what) { throw Error(origin + ": " + what); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail("malformed header: not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t chunk_size = detail::read_u32le(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      // Some writers leave a bogus size on the final data chunk; take what is there.
      if (std::memcmp(chunk, "data", 4) != 0) fail("malformed header: truncated chunk");
    }
    const std::size_t available = std::min<std::size_t>(chunk_size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) fail("malformed header: fmt chunk too short");
      format = detail::read_u16le(chunk + 8);
      channels = detail::read_u16le(chunk + 10);
      rate = detail::read_u32le(chunk + 12);
      bits = detail::read_u16le(chunk + 22);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = available;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt) fail("malformed header: missing fmt chunk");
  if (data == nullptr) fail("malformed header: missing data chunk");
  if (format != 1) fail("unsupported encoding (format tag " + std::to_string(format) + ", expected PCM)");
  if (bits != 16) fail("unsupported encoding (" + std::to_string(bits) + " bits per sample, expected 16)");
  if (channels != 1) fail("unsupported channel count " + std::to_string(channels));
  if (rate == 0) fail("malformed header: sample rate is zero");

  SignalBuffer signal;
  signal.sample_rate = static_cast<int>(rate);
  const std::size_t n = data_size / 2;
  signal.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto raw = static_cast<std::int16_t>(detail::read_u16le(data + 2 * i));
    signal.samples[i] = static_cast<double>(raw) / 32768.0;
  }
  return signal;
}

inline SignalBuffer load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open file");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.string());
}

// Samples are clamped to [-1, 1) and rounded to the nearest PCM-16 step.
inline std::vector<unsigned char> encode_wav(const SignalBuffer& signal) {
  if (signal.sample_rate <= 0) throw Error("encode_wav: sample rate must be positive");
  const auto n = static_cast<std::uint32_t>(signal.samples.size());
  std::vector<unsigned char> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32le(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);
  detail::put_u16le(out, 1);
  detail::put_u32le(out, static_cast<std::uint32_t>(signal.sample_rate));
  detail::put_u32le(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  detail::put_u16le(out, 2);
  detail::put_u16le(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32le(out, 2 * n);
  for (double s : signal.samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    detail::put_u16le(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

inline void write_wav(const std::filesystem::path& path, const SignalBuffer& signal) {
  const auto bytes = encode_wav(signal);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace pitchaccent::dsp

#endif  // PITCHACCENT_DSP_WAV_HPP

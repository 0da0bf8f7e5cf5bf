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

// Shared error type, warning sink and seed utilities.

#ifndef PITCHACCENT_COMMON_HPP
#define PITCHACCENT_COMMON_HPP

#include <cstdint>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace pitchaccent {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LogLevel { kInfo, kWarning };

using LogSink = std::function<void(LogLevel, const std::string&)>;

namespace detail {

struct LogState {
  std::mutex mutex;
  LogSink sink;
};

inline LogState& log_state() {
  static LogState state;
  return state;
}

}  // namespace detail

// Replaces the process-wide log sink. An empty sink restores stderr output.
// Returns the previous sink.
inline LogSink set_log_sink(LogSink sink) {
  auto& state = detail::log_state();
  std::lock_guard<std::mutex> lock(state.mutex);
  return std::exchange(state.sink, std::move(sink));
}

inline void log_message(LogLevel level, const std::string& message) {
  auto& state = detail::log_state();
  std::lock_guard<std::mutex> lock(state.mutex);
  if (state.sink) {
    state.sink(level, message);
    return;
  }
  std::clog << (level == LogLevel::kWarning ? "[warning] " : "[info] ") << message << '\n';
}

inline void log_warning(const std::string& message) { log_message(LogLevel::kWarning, message); }
inline void log_info(const std::string& message) { log_message(LogLevel::kInfo, message); }

// SplitMix64 finalizer. Used to derive independent job seeds from a base seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ (b + 0x632be59bd9b4e019ULL));
}

}  // namespace pitchaccent

#endif  // PITCHACCENT_COMMON_HPP

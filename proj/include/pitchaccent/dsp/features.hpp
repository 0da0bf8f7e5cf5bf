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

// Frame-level acoustic descriptors.
//
// Six descriptors are computed on a shared 10 ms hop grid:
//
//   0 rms_energy   20 ms window
//   1 loudness     20 ms window, (E / 1e-6)^0.3
//   2 f0           50 ms window, autocorrelation pitch, 3-frame median smoothed
//   3 voicing      50 ms window, normalized ACF at the selected lag
//   4 hnr_db       50 ms window, 10 log10(r / (1 - r)) clamped to +-100 dB
//   5 zcr          50 ms window
//
// Windows are left-aligned at hop * i. The frame count is that of the 50 ms
// grid; the 20 ms window at the same index always fits inside the 50 ms one.

#ifndef PITCHACCENT_DSP_FEATURES_HPP
#define PITCHACCENT_DSP_FEATURES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/dsp/wav.hpp"

namespace pitchaccent::dsp {

inline constexpr int kNumDescriptors = 6;
inline constexpr int kHopMs = 10;
inline constexpr std::array<std::string_view, kNumDescriptors> kDescriptorNames = {
    "rms_energy", "loudness", "f0_smoothed", "voicing_prob", "hnr_db", "zcr"};

inline constexpr double kLoudnessReference = 1e-6;
inline constexpr double kLoudnessExponent = 0.3;
inline constexpr double kMinF0Hz = 50.0;
inline constexpr double kMaxF0Hz = 500.0;
inline constexpr double kVoicingThreshold = 0.3;
inline constexpr double kOctaveCost = 0.01;
inline constexpr double kHnrFloorDb = -100.0;
inline constexpr double kHnrCeilDb = 100.0;

using FeatureVector = std::array<double, kNumDescriptors>;

struct FrameSpec {
  int window_ms = 50;
  int hop_ms = kHopMs;

  void validate() const {
    if (window_ms != 20 && window_ms != 50) {
      throw Error("FrameSpec: window_ms must be 20 or 50, got " + std::to_string(window_ms));
    }
    if (hop_ms != kHopMs) throw Error("FrameSpec: hop_ms must be 10");
  }

  int window_samples(int sample_rate) const {
    return static_cast<int>(std::lround(window_ms * 1e-3 * sample_rate));
  }
  int hop_samples(int sample_rate) const {
    return static_cast<int>(std::lround(hop_ms * 1e-3 * sample_rate));
  }
};

struct FrameFeatureTrack {
  std::vector<FeatureVector> frames;
  int hop_ms = kHopMs;

  std::size_t size() const { return frames.size(); }
};

inline std::size_t frame_count(std::size_t signal_length, std::size_t window, std::size_t hop) {
  if (signal_length < window) return 1;
  return (signal_length - window) / hop + 1;
}

namespace detail {

// Copies samples [start, start + window) into out, zero-filling past the end.
inline void copy_frame(std::span<const double> samples, std::size_t start, std::size_t window,
                       std::vector<double>& out) {
  out.assign(window, 0.0);
  if (start >= samples.size()) return;
  const std::size_t n = std::min(window, samples.size() - start);
  std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(start), n, out.begin());
}

inline void check_signal(const SignalBuffer& signal) {
  if (signal.empty()) throw Error("empty signal");
  if (signal.sample_rate <= 0) throw Error("signal sample rate must be positive");
}

}  // namespace detail

inline std::vector<std::vector<double>> frame_signal(const SignalBuffer& signal, const FrameSpec& spec) {
  detail::check_signal(signal);
  spec.validate();
  const auto window = static_cast<std::size_t>(spec.window_samples(signal.sample_rate));
  const auto hop = static_cast<std::size_t>(spec.hop_samples(signal.sample_rate));
  const std::size_t n = frame_count(signal.size(), window, hop);
  std::vector<std::vector<double>> frames(n);
  for (std::size_t i = 0; i < n; ++i) detail::copy_frame(signal.samples, i * hop, window, frames[i]);
  return frames;
}

inline double mean_square(std::span<const double> frame) {
  if (frame.empty()) throw Error("empty frame");
  double acc = 0.0;
  for (double x : frame) acc += x * x;
  return acc / static_cast<double>(frame.size());
}

inline double rms_energy(std::span<const double> frame) { return std::sqrt(mean_square(frame)); }

inline double loudness(std::span<const double> frame) {
  const double e = mean_square(frame);
  if (e <= 0.0) return 0.0;
  return std::pow(e / kLoudnessReference, kLoudnessExponent);
}

// Sign changes between consecutive samples over (length - 1); zero counts as positive.
inline double zero_crossing_rate(std::span<const double> frame) {
  if (frame.size() < 2) throw Error("zero_crossing_rate: frame needs at least 2 samples");
  std::size_t crossings = 0;
  bool prev_negative = frame[0] < 0.0;
  for (std::size_t i = 1; i < frame.size(); ++i) {
    const bool negative = frame[i] < 0.0;
    crossings += negative != prev_negative ? 1 : 0;
    prev_negative = negative;
  }
  return static_cast<double>(crossings) / static_cast<double>(frame.size() - 1);
}

struct PitchEstimate {
  double f0 = 0.0;
  double voicing = 0.0;
  // Normalized ACF at the selected lag before clamping; 0 for silence.
  double peak_ratio = 0.0;
  int lag = 0;
};

// Autocorrelation pitch over lags [sr/500, sr/50].
//
// The ACF is overlap-normalized, r(k) = mean_{n<N-k} x[n] x[n+k], and divided by
// r(0). The lag is the local maximum of r(k)/r(0) - 0.01 log2(k); the small
// per-octave cost stops integer-lag rounding from favouring period multiples.
inline PitchEstimate estimate_pitch(std::span<const double> frame, int sample_rate) {
  if (sample_rate <= 0) throw Error("estimate_pitch: sample rate must be positive");
  const auto n = static_cast<int>(frame.size());
  const int min_lag = static_cast<int>(std::ceil(sample_rate / kMaxF0Hz));
  const int max_lag = std::min(static_cast<int>(std::floor(sample_rate / kMinF0Hz)), n - 1);
  if (n < static_cast<int>(std::ceil(sample_rate / kMinF0Hz))) {
    throw Error("estimate_pitch: frame shorter than one period at 50 Hz");
  }

  double r0 = 0.0;
  for (double x : frame) r0 += x * x;
  r0 /= n;
  PitchEstimate out;
  if (r0 <= 0.0) return out;

  const int count = max_lag - min_lag + 1;
  std::vector<double> ratio(static_cast<std::size_t>(count));
  for (int k = min_lag; k <= max_lag; ++k) {
    double acc = 0.0;
    const double* x = frame.data();
#pragma omp simd reduction(+ : acc)
    for (int i = 0; i < n - k; ++i) acc += x[i] * x[i + k];
    ratio[static_cast<std::size_t>(k - min_lag)] = (acc / (n - k)) / r0;
  }

  auto score = [&](int idx) { return ratio[static_cast<std::size_t>(idx)] - kOctaveCost * std::log2(min_lag + idx); };
  int best = -1;
  for (int idx = 1; idx + 1 < count; ++idx) {
    const double v = ratio[static_cast<std::size_t>(idx)];
    if (v >= ratio[static_cast<std::size_t>(idx - 1)] && v >= ratio[static_cast<std::size_t>(idx + 1)]) {
      if (best < 0 || score(idx) > score(best)) best = idx;
    }
  }
  if (best < 0) {
    best = 0;
    for (int idx = 1; idx < count; ++idx) {
      if (score(idx) > score(best)) best = idx;
    }
  }

  out.lag = min_lag + best;
  out.peak_ratio = ratio[static_cast<std::size_t>(best)];
  out.voicing = std::clamp(out.peak_ratio, 0.0, 1.0);
  out.f0 = out.voicing < kVoicingThreshold ? 0.0 : static_cast<double>(sample_rate) / out.lag;
  return out;
}

struct F0Voicing {
  double f0 = 0.0;
  double voicing_prob = 0.0;
};

inline F0Voicing f0_and_voicing(std::span<const double> frame, int sample_rate) {
  const PitchEstimate p = estimate_pitch(frame, sample_rate);
  return {p.f0, p.voicing};
}

inline double hnr_from_estimate(const PitchEstimate& p) {
  if (p.voicing < kVoicingThreshold) return kHnrFloorDb;
  if (p.peak_ratio >= 1.0) return kHnrCeilDb;
  const double db = 10.0 * std::log10(p.peak_ratio / (1.0 - p.peak_ratio));
  return std::clamp(db, kHnrFloorDb, kHnrCeilDb);
}

inline double hnr(std::span<const double> frame, int sample_rate) {
  return hnr_from_estimate(estimate_pitch(frame, sample_rate));
}

inline double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

inline FrameFeatureTrack extract_lld_track(const SignalBuffer& signal) {
  detail::check_signal(signal);
  const int sr = signal.sample_rate;
  const FrameSpec long_spec{50, kHopMs};
  const FrameSpec short_spec{20, kHopMs};
  const auto long_window = static_cast<std::size_t>(long_spec.window_samples(sr));
  const auto short_window = static_cast<std::size_t>(short_spec.window_samples(sr));
  const auto hop = static_cast<std::size_t>(long_spec.hop_samples(sr));
  if (hop == 0) throw Error("sample rate too low for a 10 ms hop");

  const std::size_t n = frame_count(signal.size(), long_window, hop);
  FrameFeatureTrack track;
  track.frames.resize(n);
  std::vector<double> raw_f0(n);
  std::vector<double> long_frame, short_frame;
  for (std::size_t i = 0; i < n; ++i) {
    detail::copy_frame(signal.samples, i * hop, short_window, short_frame);
    detail::copy_frame(signal.samples, i * hop, long_window, long_frame);
    const PitchEstimate pitch = estimate_pitch(long_frame, sr);
    FeatureVector& v = track.frames[i];
    v[0] = rms_energy(short_frame);
    v[1] = loudness(short_frame);
    v[3] = pitch.voicing;
    v[4] = hnr_from_estimate(pitch);
    v[5] = zero_crossing_rate(long_frame);
    raw_f0[i] = pitch.f0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    track.frames[i][2] = (i == 0 || i + 1 == n) ? raw_f0[i] : median3(raw_f0[i - 1], raw_f0[i], raw_f0[i + 1]);
  }
  return track;
}

inline void write_track_csv(std::ostream& out, const FrameFeatureTrack& track) {
  out << "frame_idx,rms_energy,loudness,f0,voicing,hnr,zcr\n";
  char buf[64];
  for (std::size_t i = 0; i < track.size(); ++i) {
    out << i;
    for (double v : track.frames[i]) {
      std::snprintf(buf, sizeof(buf), ",%.6f", v);
      out << buf;
    }
    out << '\n';
  }
}

inline void write_track_csv(const std::filesystem::path& path, const FrameFeatureTrack& track) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_track_csv(out, track);
}

inline FrameFeatureTrack read_track_csv(std::istream& in, const std::string& origin = "<stream>") {
  std::string line;
  if (!std::getline(in, line) || line != "frame_idx,rms_energy,loudness,f0,voicing,hnr,zcr") {
    throw Error(origin + ": line 1: unexpected feature track header");
  }
  FrameFeatureTrack track;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::size_t idx = 0;
    FeatureVector v{};
    if (!(fields >> idx)) throw Error(origin + ": line " + std::to_string(line_no) + ": bad frame index");
    for (double& x : v) {
      if (!(fields >> x)) throw Error(origin + ": line " + std::to_string(line_no) + ": expected 6 values");
    }
    if (idx != track.size()) throw Error(origin + ": line " + std::to_string(line_no) + ": frames out of order");
    track.frames.push_back(v);
  }
  return track;
}

}  // namespace pitchaccent::dsp

#endif  // PITCHACCENT_DSP_FEATURES_HPP

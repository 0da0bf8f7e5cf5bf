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

// Brute-force reference implementations used as test oracles. They share no
// code with the library kernels (no im2col, no workspace reuse).

#ifndef PITCHACCENT_TESTS_REFERENCE_OPS_HPP
#define PITCHACCENT_TESTS_REFERENCE_OPS_HPP

#include <random>
#include <vector>

#include "pitchaccent/nn/layers.hpp"

namespace pitchaccent::testing {

template <typename T>
void fill_uniform(nn::Tensor<T>& t, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
}

// Sextuple loop over (out channel, out row, out col, in channel, kernel row, kernel col).
inline nn::Tensor<double> naive_conv2d(const nn::Tensor<double>& in, const nn::ConvLayerParams<double>& p) {
  const std::size_t cout = p.kernels.dim(0), cig = p.kernels.dim(1), kh = p.kernels.dim(2), kw = p.kernels.dim(3);
  const std::size_t h = in.dim(1), w = in.dim(2);
  const std::size_t oh = (h - kh) / p.stride.rows + 1, ow = (w - kw) / p.stride.cols + 1;
  const std::size_t per_group = cout / p.groups;
  nn::Tensor<double> out({cout, oh, ow});
  for (std::size_t o = 0; o < cout; ++o) {
    const std::size_t g = o / per_group;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = p.bias[o];
        for (std::size_t c = 0; c < cig; ++c) {
          for (std::size_t ky = 0; ky < kh; ++ky) {
            for (std::size_t kx = 0; kx < kw; ++kx) {
              acc += p.kernels.at(o, c, ky, kx) * in.at(g * cig + c, y * p.stride.rows + ky, x * p.stride.cols + kx);
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

inline std::vector<double> naive_maxpool(const nn::Tensor<double>& in) {
  std::vector<double> out(in.dim(0));
  for (std::size_t c = 0; c < in.dim(0); ++c) {
    double best = in.at(c, 0, 0);
    for (std::size_t t = 1; t < in.dim(1); ++t) best = in.at(c, t, 0) > best ? in.at(c, t, 0) : best;
    out[c] = best;
  }
  return out;
}

inline std::vector<double> naive_dense(const nn::Tensor<double>& x, const nn::DenseLayerParams<double>& p,
                                       nn::Activation act) {
  std::vector<double> y(p.weights.dim(0));
  for (std::size_t o = 0; o < y.size(); ++o) {
    double acc = p.bias[o];
    for (std::size_t i = 0; i < x.size(); ++i) acc += p.weights.at(o, i) * x[i];
    y[o] = act == nn::Activation::kRelu && acc < 0 ? 0.0 : acc;
  }
  return y;
}

}  // namespace pitchaccent::testing

#endif  // PITCHACCENT_TESTS_REFERENCE_OPS_HPP

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

// Layer primitives with hand-written backward passes.
//
// Every *_backward accumulates (+=) into the parameter gradients it is given,
// so a mini-batch is the sum of per-example calls.

#ifndef PITCHACCENT_NN_LAYERS_HPP
#define PITCHACCENT_NN_LAYERS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/nn/tensor.hpp"

namespace pitchaccent::nn {

struct Stride {
  std::size_t rows = 1;
  std::size_t cols = 1;
};

template <typename Real>
struct ConvLayerParams {
  Tensor<Real> kernels;  // [out, in / groups, kh, kw]
  Tensor<Real> bias;     // [out]
  Stride stride;
  std::size_t groups = 1;

  ConvLayerParams() = default;
  ConvLayerParams(std::size_t out_channels, std::size_t in_channels, std::size_t kh, std::size_t kw, Stride s,
                  std::size_t g = 1)
      : stride(s), groups(g) {
    if (kh == 0 || kw == 0) throw Error("conv kernel dimensions must be >= 1");
    if (s.rows == 0 || s.cols == 0) throw Error("conv strides must be >= 1");
    if (g == 0 || in_channels % g != 0 || out_channels % g != 0) {
      throw Error("conv groups must divide both channel counts");
    }
    kernels = Tensor<Real>({out_channels, in_channels / g, kh, kw});
    bias = Tensor<Real>({out_channels});
  }

  std::size_t out_channels() const { return kernels.dim(0); }
  std::size_t in_channels() const { return kernels.dim(1) * groups; }
  std::size_t kernel_rows() const { return kernels.dim(2); }
  std::size_t kernel_cols() const { return kernels.dim(3); }
};

template <typename Real>
struct DenseLayerParams {
  Tensor<Real> weights;  // [out, in]
  Tensor<Real> bias;     // [out]

  DenseLayerParams() = default;
  DenseLayerParams(std::size_t out, std::size_t in) : weights({out, in}), bias({out}) {}

  std::size_t out_features() const { return weights.dim(0); }
  std::size_t in_features() const { return weights.dim(1); }
};

inline std::size_t conv_output_length(std::size_t input, std::size_t kernel, std::size_t stride) {
  if (input < kernel) return 0;
  return (input - kernel) / stride + 1;
}

// ---------------------------------------------------------------------------
// conv2d: valid cross-correlation, no dilation.

// im2col patches reused between forward and backward.
template <typename Real>
struct ConvWorkspace {
  std::vector<Real> patches;  // [groups][positions][in/groups * kh * kw]
};

namespace detail {

template <typename Real>
void im2col(const Tensor<Real>& input, const ConvLayerParams<Real>& p, std::size_t out_h, std::size_t out_w,
            std::vector<Real>& patches) {
  const std::size_t cig = p.kernels.dim(1), kh = p.kernel_rows(), kw = p.kernel_cols();
  const std::size_t h = input.dim(1), w = input.dim(2);
  const std::size_t k = cig * kh * kw;
  const std::size_t positions = out_h * out_w;
  patches.resize(p.groups * positions * k);
  const Real* in = input.data();
  for (std::size_t g = 0; g < p.groups; ++g) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        Real* row = patches.data() + (g * positions + oy * out_w + ox) * k;
        for (std::size_t c = 0; c < cig; ++c) {
          const Real* plane = in + (g * cig + c) * h * w;
          for (std::size_t ky = 0; ky < kh; ++ky) {
            const Real* src = plane + (oy * p.stride.rows + ky) * w + ox * p.stride.cols;
            std::copy_n(src, kw, row);
            row += kw;
          }
        }
      }
    }
  }
}

// The simd pragma permits a reassociated (vectorized) reduction; it is a
// no-op unless compiled with -fopenmp-simd.
template <typename Real>
Real dot(const Real* a, const Real* b, std::size_t n) {
  Real acc = 0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename Real>
void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace detail

template <typename Real>
Tensor<Real> conv2d(const Tensor<Real>& input, const ConvLayerParams<Real>& p, ConvWorkspace<Real>* ws = nullptr) {
  if (input.rank() != 3) throw Error("conv2d: input must be [channels, height, width]");
  if (input.dim(0) != p.in_channels()) {
    throw Error("conv2d: input has " + std::to_string(input.dim(0)) + " channels, kernels expect " +
                std::to_string(p.in_channels()));
  }
  const std::size_t h = input.dim(1), w = input.dim(2);
  if (h < p.kernel_rows() || w < p.kernel_cols()) {
    throw Error("conv2d: kernel " + std::to_string(p.kernel_rows()) + "x" + std::to_string(p.kernel_cols()) +
                " larger than input " + std::to_string(h) + "x" + std::to_string(w));
  }
  const std::size_t out_h = conv_output_length(h, p.kernel_rows(), p.stride.rows);
  const std::size_t out_w = conv_output_length(w, p.kernel_cols(), p.stride.cols);
  ConvWorkspace<Real> local;
  ConvWorkspace<Real>& work = ws ? *ws : local;
  detail::im2col(input, p, out_h, out_w, work.patches);

  const std::size_t co = p.out_channels(), per_group = co / p.groups;
  const std::size_t k = p.kernels.dim(1) * p.kernel_rows() * p.kernel_cols();
  const std::size_t positions = out_h * out_w;
  Tensor<Real> out({co, out_h, out_w});
  for (std::size_t o = 0; o < co; ++o) {
    const Real* kernel = p.kernels.data() + o * k;
    const Real* patches = work.patches.data() + (o / per_group) * positions * k;
    Real* dst = out.data() + o * positions;
    for (std::size_t pos = 0; pos < positions; ++pos) dst[pos] = p.bias[o] + detail::dot(kernel, patches + pos * k, k);
  }
  return out;
}

// grad_input may be null when the input gradient is not needed (first layer).
template <typename Real>
void conv2d_backward(const Tensor<Real>& input, const ConvLayerParams<Real>& p, const Tensor<Real>& grad_out,
                     ConvLayerParams<Real>& grads, Tensor<Real>* grad_input, const ConvWorkspace<Real>* ws = nullptr) {
  const std::size_t h = input.dim(1), w = input.dim(2);
  const std::size_t out_h = grad_out.dim(1), out_w = grad_out.dim(2);
  const std::size_t co = p.out_channels(), per_group = co / p.groups;
  const std::size_t cig = p.kernels.dim(1), kh = p.kernel_rows(), kw = p.kernel_cols();
  const std::size_t k = cig * kh * kw;
  const std::size_t positions = out_h * out_w;

  std::vector<Real> local;
  const std::vector<Real>* patches = ws ? &ws->patches : nullptr;
  if (!patches || patches->size() != p.groups * positions * k) {
    detail::im2col(input, p, out_h, out_w, local);
    patches = &local;
  }

  std::vector<Real> grad_patches;
  if (grad_input) grad_patches.assign(p.groups * positions * k, Real(0));

  for (std::size_t o = 0; o < co; ++o) {
    const std::size_t g = o / per_group;
    const Real* go = grad_out.data() + o * positions;
    const Real* kernel = p.kernels.data() + o * k;
    Real* gk = grads.kernels.data() + o * k;
    Real bias_acc = 0;
    for (std::size_t pos = 0; pos < positions; ++pos) {
      const Real gv = go[pos];
      if (gv == Real(0)) continue;
      bias_acc += gv;
      detail::axpy(gv, patches->data() + (g * positions + pos) * k, gk, k);
      if (grad_input) detail::axpy(gv, kernel, grad_patches.data() + (g * positions + pos) * k, k);
    }
    grads.bias[o] += bias_acc;
  }

  if (!grad_input) return;
  *grad_input = Tensor<Real>(input.shape());
  Real* gi = grad_input->data();
  for (std::size_t g = 0; g < p.groups; ++g) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const Real* row = grad_patches.data() + (g * positions + oy * out_w + ox) * k;
        for (std::size_t c = 0; c < cig; ++c) {
          Real* plane = gi + (g * cig + c) * h * w;
          for (std::size_t ky = 0; ky < kh; ++ky) {
            Real* dst = plane + (oy * p.stride.rows + ky) * w + ox * p.stride.cols;
            for (std::size_t kx = 0; kx < kw; ++kx) dst[kx] += row[kx];
            row += kw;
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Global max pooling over the time axis of a [channels, time, 1] map.

template <typename Real>
struct MaxPoolResult {
  Tensor<Real> output;               // [channels]
  std::vector<std::size_t> argmax;  // earliest maximum per channel
};

template <typename Real>
MaxPoolResult<Real> maxpool_over_time(const Tensor<Real>& input) {
  if (input.rank() != 3 || input.dim(2) != 1) throw Error("maxpool_over_time: input must be [channels, time, 1]");
  const std::size_t c = input.dim(0), h = input.dim(1);
  if (h == 0) throw Error("maxpool_over_time: empty time axis");
  MaxPoolResult<Real> r{Tensor<Real>({c}), std::vector<std::size_t>(c, 0)};
  for (std::size_t ch = 0; ch < c; ++ch) {
    const Real* row = input.data() + ch * h;
    std::size_t best = 0;
    for (std::size_t t = 1; t < h; ++t) {
      if (row[t] > row[best]) best = t;
    }
    r.output[ch] = row[best];
    r.argmax[ch] = best;
  }
  return r;
}

template <typename Real>
Tensor<Real> maxpool_over_time_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                                        const Tensor<Real>& grad_out) {
  Tensor<Real> gi(input_shape);
  const std::size_t h = input_shape[1];
  for (std::size_t ch = 0; ch < argmax.size(); ++ch) gi[ch * h + argmax[ch]] = grad_out[ch];
  return gi;
}

// ---------------------------------------------------------------------------
// Fully connected layer.

enum class Activation { kIdentity, kRelu };

template <typename Real>
Tensor<Real> dense(const Tensor<Real>& x, const DenseLayerParams<Real>& p, Activation act) {
  if (x.rank() != 1 || x.size() != p.in_features()) {
    throw Error("dense: input length " + std::to_string(x.size()) + " != " + std::to_string(p.in_features()));
  }
  const std::size_t out = p.out_features(), in = p.in_features();
  Tensor<Real> y({out});
  for (std::size_t o = 0; o < out; ++o) {
    Real v = p.bias[o] + detail::dot(p.weights.data() + o * in, x.data(), in);
    y[o] = (act == Activation::kRelu && v < Real(0)) ? Real(0) : v;
  }
  return y;
}

// y is the forward output; relu gradients pass where y > 0.
template <typename Real>
void dense_backward(const Tensor<Real>& x, const Tensor<Real>& y, const DenseLayerParams<Real>& p, Activation act,
                    const Tensor<Real>& grad_y, DenseLayerParams<Real>& grads, Tensor<Real>* grad_x) {
  const std::size_t out = p.out_features(), in = p.in_features();
  if (grad_x) *grad_x = Tensor<Real>({in});
  for (std::size_t o = 0; o < out; ++o) {
    Real g = grad_y[o];
    if (act == Activation::kRelu && !(y[o] > Real(0))) g = Real(0);
    if (g == Real(0)) continue;
    grads.bias[o] += g;
    detail::axpy(g, x.data(), grads.weights.data() + o * in, in);
    if (grad_x) detail::axpy(g, p.weights.data() + o * in, grad_x->data(), in);
  }
}

// ---------------------------------------------------------------------------
// Inverted dropout.

enum class Mode { kTrain, kEval };

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename Real>
struct DropoutResult {
  Tensor<Real> output;
  std::vector<Real> mask;  // 0 or 1/(1-p); empty means identity
};

template <typename Real>
DropoutResult<Real> dropout(const Tensor<Real>& input, double p, Mode mode, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw Error("dropout: p must be in [0, 1)");
  DropoutResult<Real> r{input, {}};
  if (mode == Mode::kEval || p == 0.0) return r;
  const Real scale = static_cast<Real>(1.0 / (1.0 - p));
  r.mask.resize(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    r.mask[i] = uniform01(rng) < p ? Real(0) : scale;
    r.output[i] *= r.mask[i];
  }
  return r;
}

template <typename Real>
Tensor<Real> dropout_backward(const std::vector<Real>& mask, const Tensor<Real>& grad_out) {
  Tensor<Real> g = grad_out;
  if (mask.empty()) return g;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask[i];
  return g;
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy with L2 on weight tensors.

template <typename Real>
std::vector<Real> softmax(std::span<const Real> logits) {
  const Real m = *std::max_element(logits.begin(), logits.end());
  std::vector<Real> p(logits.size());
  Real z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += p[i] = std::exp(logits[i] - m);
  for (Real& v : p) v /= z;
  return p;
}

template <typename Real>
struct XentResult {
  double loss = 0.0;
  std::vector<Real> probs;
  Tensor<Real> grad_logits;
};

template <typename Real>
XentResult<Real> softmax_xent(const Tensor<Real>& logits, std::size_t gold) {
  if (gold >= logits.size()) throw Error("softmax_xent: gold class out of range");
  XentResult<Real> r;
  const Real m = *std::max_element(logits.values().begin(), logits.values().end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += std::exp(static_cast<double>(logits[i] - m));
  const double log_z = std::log(z) + static_cast<double>(m);
  r.loss = log_z - static_cast<double>(logits[gold]);
  r.probs.resize(logits.size());
  r.grad_logits = Tensor<Real>({logits.size()});
  for (std::size_t i = 0; i < logits.size(); ++i) {
    r.probs[i] = static_cast<Real>(std::exp(static_cast<double>(logits[i]) - log_z));
    r.grad_logits[i] = r.probs[i] - (i == gold ? Real(1) : Real(0));
  }
  return r;
}

template <typename Real>
double l2_penalty(std::span<const Tensor<Real>* const> weights, double lambda) {
  double acc = 0.0;
  for (const auto* w : weights) {
    for (Real v : w->values()) acc += static_cast<double>(v) * static_cast<double>(v);
  }
  return lambda * acc;
}

template <typename Real>
struct XentL2Result {
  double loss = 0.0;       // data + penalty
  double data_loss = 0.0;  // cross-entropy only
  std::vector<Real> probs;
  Tensor<Real> grad_logits;
  std::vector<Tensor<Real>> weight_grads;  // d penalty / d weight, one per tensor
};

// Biases are excluded: pass weight tensors only.
template <typename Real>
XentL2Result<Real> softmax_xent_l2(const Tensor<Real>& logits, std::size_t gold,
                                   std::span<const Tensor<Real>* const> weights, double lambda) {
  auto x = softmax_xent(logits, gold);
  XentL2Result<Real> r;
  r.data_loss = x.loss;
  r.loss = x.loss + l2_penalty(weights, lambda);
  r.probs = std::move(x.probs);
  r.grad_logits = std::move(x.grad_logits);
  for (const auto* w : weights) {
    Tensor<Real> g(w->shape());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<Real>(2.0 * lambda) * (*w)[i];
    r.weight_grads.push_back(std::move(g));
  }
  return r;
}

}  // namespace pitchaccent::nn

#endif  // PITCHACCENT_NN_LAYERS_HPP

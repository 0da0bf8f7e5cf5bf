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

// Acoustic CNN with an optional word-embedding bottleneck branch.
//
//   acoustic: [1, s_max, d+1] -> conv1 6x(d+1) /4 -> relu -> conv2 4x1 /2 -> relu
//             -> max over time -> 100 -> dropout 0.2
//   lexical:  embeddings (n * dim) -> dropout 0.8 -> dense(n_bottleneck) -> relu
//   fused:    concat(acoustic, lexical) -> dense(2) -> softmax
//
// The two branches carry separate L2 coefficients. Softmax weight columns are
// regularized with the coefficient of the branch that feeds them.

#ifndef PITCHACCENT_MODEL_HPP
#define PITCHACCENT_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/corpus.hpp"
#include "pitchaccent/nn/adam.hpp"
#include "pitchaccent/nn/checkpoint.hpp"
#include "pitchaccent/nn/layers.hpp"
#include "pitchaccent/nn/tensor.hpp"

namespace pitchaccent {

using nn::Tensor;

enum class ModelMode { kAcoustic, kAcousticEmbs, kEmbsOnly };

inline ModelMode parse_model_mode(std::string_view s) {
  if (s == "acoustic") return ModelMode::kAcoustic;
  if (s == "acoustic+embs") return ModelMode::kAcousticEmbs;
  if (s == "embs-only" || s == "embs_only") return ModelMode::kEmbsOnly;
  throw Error("unknown mode '" + std::string(s) + "' (expected acoustic, acoustic+embs or embs-only)");
}

inline std::string_view to_string(ModelMode m) {
  switch (m) {
    case ModelMode::kAcoustic:
      return "acoustic";
    case ModelMode::kAcousticEmbs:
      return "acoustic+embs";
    case ModelMode::kEmbsOnly:
      return "embs-only";
  }
  return "?";
}

inline bool uses_acoustic(ModelMode m) { return m != ModelMode::kEmbsOnly; }
inline bool uses_lexical(ModelMode m) { return m != ModelMode::kAcoustic; }

struct AcousticConfig {
  int d = dsp::kNumDescriptors;
  int s_max = 0;
  int conv1_kernels = 100;
  int conv1_rows = 6;
  int conv1_stride = 4;
  int conv2_kernels = 100;
  int conv2_rows = 4;
  int conv2_stride = 2;
  bool depthwise_conv2 = false;
  double dropout_p = 0.2;
  double l2_lambda = 1e-4;

  int input_rows() const { return d + 1; }  // descriptors + position indicator
  int conv1_length() const {
    return static_cast<int>(nn::conv_output_length(static_cast<std::size_t>(s_max), conv1_rows, conv1_stride));
  }
  int conv2_length() const {
    return static_cast<int>(nn::conv_output_length(static_cast<std::size_t>(conv1_length()), conv2_rows, conv2_stride));
  }
  // Smallest s_max for which both convolutions have at least one output row.
  int min_s_max() const { return conv1_rows + ((conv2_rows - 1) * conv1_stride); }

  void validate() const {
    if (d < 1) throw Error("AcousticConfig: d must be >= 1");
    if (conv1_kernels < 1 || conv2_kernels < 1 || conv1_rows < 1 || conv2_rows < 1 || conv1_stride < 1 ||
        conv2_stride < 1) {
      throw Error("AcousticConfig: kernel counts, sizes and strides must be >= 1");
    }
    if (depthwise_conv2 && conv2_kernels != conv1_kernels) {
      throw Error("AcousticConfig: depthwise conv2 needs conv2_kernels == conv1_kernels");
    }
    if (s_max < conv1_rows) {
      throw Error("AcousticConfig: s_max " + std::to_string(s_max) + " smaller than conv1 kernel height " +
                  std::to_string(conv1_rows));
    }
    if (conv2_length() < 1) {
      throw Error("AcousticConfig: s_max " + std::to_string(s_max) + " gives conv1 length " +
                  std::to_string(conv1_length()) + ", shorter than conv2 kernel height " + std::to_string(conv2_rows) +
                  " (minimum s_max is " + std::to_string(min_s_max()) + ")");
    }
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw Error("AcousticConfig: dropout_p must be in [0, 1)");
    if (l2_lambda < 0.0) throw Error("AcousticConfig: l2_lambda must be >= 0");
  }
};

struct LexicalConfig {
  int embed_dim = 300;
  int n_words = 1;
  int bottleneck_n = 10;
  double input_dropout_p = 0.8;
  double l2_lambda = 1e-4;

  int input_size() const { return embed_dim * n_words; }

  void validate() const {
    if (embed_dim < 1) throw Error("LexicalConfig: embed_dim must be >= 1");
    if (n_words != 1 && n_words != 3) throw Error("LexicalConfig: n_words must be 1 or 3");
    if (bottleneck_n < 1) throw Error("LexicalConfig: bottleneck_n must be >= 1");
    if (!(input_dropout_p >= 0.0 && input_dropout_p < 1.0)) throw Error("LexicalConfig: dropout must be in [0, 1)");
    if (l2_lambda < 0.0) throw Error("LexicalConfig: l2_lambda must be >= 0");
  }
};

template <typename Real>
struct ModelParams {
  nn::ConvLayerParams<Real> conv1;
  nn::ConvLayerParams<Real> conv2;
  nn::DenseLayerParams<Real> bottleneck;
  nn::DenseLayerParams<Real> output;

  // Active tensors in a fixed order; inactive branches have empty tensors.
  std::vector<Tensor<Real>*> tensors() {
    std::vector<Tensor<Real>*> out;
    for (auto* t : {&conv1.kernels, &conv1.bias, &conv2.kernels, &conv2.bias, &bottleneck.weights, &bottleneck.bias,
                    &output.weights, &output.bias}) {
      if (!t->empty()) out.push_back(t);
    }
    return out;
  }
  std::vector<const Tensor<Real>*> tensors() const {
    std::vector<const Tensor<Real>*> out;
    for (auto* t : const_cast<ModelParams*>(this)->tensors()) out.push_back(t);
    return out;
  }
  std::vector<std::string> names() const {
    static const char* kNames[] = {"conv1.kernels",      "conv1.bias",      "conv2.kernels",  "conv2.bias",
                                   "bottleneck.weights", "bottleneck.bias", "output.weights", "output.bias"};
    std::vector<std::string> out;
    const Tensor<Real>* all[] = {&conv1.kernels,      &conv1.bias,      &conv2.kernels,  &conv2.bias,
                                 &bottleneck.weights, &bottleneck.bias, &output.weights, &output.bias};
    for (std::size_t i = 0; i < 8; ++i) {
      if (!all[i]->empty()) out.emplace_back(kNames[i]);
    }
    return out;
  }

  // Same layout, all zeros (used for gradients).
  ModelParams zeros_like() const {
    ModelParams z = *this;
    for (auto* t : z.tensors()) t->zero();
    return z;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* t : tensors()) n += t->size();
    return n;
  }

  bool all_finite() const {
    for (const auto* t : tensors()) {
      if (!t->all_finite()) return false;
    }
    return true;
  }
};

template <typename Real>
struct LexicoAcousticModel {
  AcousticConfig acoustic;
  LexicalConfig lexical;
  ModelMode mode = ModelMode::kAcoustic;
  ModelParams<Real> params;

  std::size_t acoustic_width() const {
    return uses_acoustic(mode) ? static_cast<std::size_t>(acoustic.conv2_kernels) : 0;
  }
  std::size_t lexical_width() const {
    return uses_lexical(mode) ? static_cast<std::size_t>(lexical.bottleneck_n) : 0;
  }
  std::size_t fused_width() const { return acoustic_width() + lexical_width(); }
};

namespace detail {

template <typename Real>
void glorot_uniform(Tensor<Real>& t, double fan_in, double fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : t.values()) v = static_cast<Real>((2.0 * nn::uniform01(rng) - 1.0) * limit);
}

}  // namespace detail

// Weights are Glorot-uniform, biases zero.
template <typename Real>
LexicoAcousticModel<Real> build_model(const AcousticConfig& acfg, const LexicalConfig& lcfg, ModelMode mode,
                                      std::mt19937_64& rng) {
  LexicoAcousticModel<Real> m;
  m.acoustic = acfg;
  m.lexical = lcfg;
  m.mode = mode;
  if (uses_acoustic(mode)) {
    acfg.validate();
    const auto k1 = static_cast<std::size_t>(acfg.conv1_kernels);
    const auto k2 = static_cast<std::size_t>(acfg.conv2_kernels);
    const auto rows = static_cast<std::size_t>(acfg.input_rows());
    m.params.conv1 = nn::ConvLayerParams<Real>(k1, 1, static_cast<std::size_t>(acfg.conv1_rows), rows,
                                               {static_cast<std::size_t>(acfg.conv1_stride), 1});
    m.params.conv2 = nn::ConvLayerParams<Real>(k2, k1, static_cast<std::size_t>(acfg.conv2_rows), 1,
                                               {static_cast<std::size_t>(acfg.conv2_stride), 1},
                                               acfg.depthwise_conv2 ? k1 : 1);
    detail::glorot_uniform(m.params.conv1.kernels, static_cast<double>(acfg.conv1_rows * rows),
                           static_cast<double>(k1 * acfg.conv1_rows * rows), rng);
    detail::glorot_uniform(m.params.conv2.kernels,
                           static_cast<double>(m.params.conv2.kernels.dim(1) * acfg.conv2_rows),
                           static_cast<double>(k2 * acfg.conv2_rows), rng);
  }
  if (uses_lexical(mode)) {
    lcfg.validate();
    const auto in = static_cast<std::size_t>(lcfg.input_size());
    const auto n = static_cast<std::size_t>(lcfg.bottleneck_n);
    m.params.bottleneck = nn::DenseLayerParams<Real>(n, in);
    detail::glorot_uniform(m.params.bottleneck.weights, static_cast<double>(in), static_cast<double>(n), rng);
  }
  const std::size_t width = m.fused_width();
  m.params.output = nn::DenseLayerParams<Real>(kNumClasses, width);
  detail::glorot_uniform(m.params.output.weights, static_cast<double>(width), static_cast<double>(kNumClasses), rng);
  return m;
}

// [1, s_max, d+1] tensor from a (d+1) x s_max matrix.
template <typename Real>
Tensor<Real> to_acoustic_input(const InputMatrix& m) {
  Tensor<Real> t({1, static_cast<std::size_t>(m.s_max), static_cast<std::size_t>(kMatrixRows)});
  for (int r = 0; r < kMatrixRows; ++r) {
    for (std::size_t c = 0; c < static_cast<std::size_t>(m.s_max); ++c) t.at(0, c, r) = static_cast<Real>(m.at(r, c));
  }
  return t;
}

template <typename Real>
Tensor<Real> to_lexical_input(std::span<const double> v) {
  Tensor<Real> t({v.size()});
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = static_cast<Real>(v[i]);
  return t;
}

template <typename Real>
struct ModelInput {
  const Tensor<Real>* acoustic = nullptr;  // [1, s_max, d+1]
  const Tensor<Real>* lexical = nullptr;   // [n_words * embed_dim]
};

template <typename Real>
struct ForwardCache {
  nn::ConvWorkspace<Real> conv1_ws;
  nn::ConvWorkspace<Real> conv2_ws;
  Tensor<Real> conv1_out;  // after relu
  Tensor<Real> conv2_out;  // after relu
  nn::MaxPoolResult<Real> pooled;
  std::vector<Real> acoustic_mask;
  Tensor<Real> lexical_in;  // after input dropout
  std::vector<Real> lexical_mask;
  Tensor<Real> bottleneck_out;
  Tensor<Real> fused;
  Tensor<Real> logits;
};

namespace detail {

template <typename Real>
void relu_inplace(Tensor<Real>& t) {
  for (auto& v : t.values()) v = v > Real(0) ? v : Real(0);
}

template <typename Real>
void relu_backward_inplace(const Tensor<Real>& activated, Tensor<Real>& grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activated[i] > Real(0))) grad[i] = Real(0);
  }
}

template <typename Real>
void check_input(const LexicoAcousticModel<Real>& model, const ModelInput<Real>& in) {
  if (uses_acoustic(model.mode)) {
    if (!in.acoustic) throw Error("forward: acoustic input required");
    const nn::Shape expected{1, static_cast<std::size_t>(model.acoustic.s_max),
                             static_cast<std::size_t>(model.acoustic.input_rows())};
    nn::require_shape(*in.acoustic, expected, "forward: acoustic input");
  }
  if (uses_lexical(model.mode)) {
    if (!in.lexical) throw Error("forward: lexical input required in mode " + std::string(to_string(model.mode)));
    nn::require_shape(*in.lexical, {static_cast<std::size_t>(model.lexical.input_size())}, "forward: lexical input");
  }
}

}  // namespace detail

// Logits for one word. Dropout is active only in Mode::kTrain.
template <typename Real>
Tensor<Real> forward_logits(const LexicoAcousticModel<Real>& model, const ModelInput<Real>& in, nn::Mode mode,
                            std::mt19937_64& rng, ForwardCache<Real>* cache = nullptr) {
  detail::check_input(model, in);
  ForwardCache<Real> local;
  ForwardCache<Real>& c = cache ? *cache : local;
  const auto& p = model.params;
  c.fused = Tensor<Real>({model.fused_width()});
  std::size_t offset = 0;
  if (uses_acoustic(model.mode)) {
    c.conv1_out = nn::conv2d(*in.acoustic, p.conv1, &c.conv1_ws);
    detail::relu_inplace(c.conv1_out);
    c.conv2_out = nn::conv2d(c.conv1_out, p.conv2, &c.conv2_ws);
    detail::relu_inplace(c.conv2_out);
    c.pooled = nn::maxpool_over_time(c.conv2_out);
    auto dropped = nn::dropout(c.pooled.output, model.acoustic.dropout_p, mode, rng);
    c.acoustic_mask = std::move(dropped.mask);
    std::copy(dropped.output.values().begin(), dropped.output.values().end(), c.fused.data());
    offset = dropped.output.size();
  }
  if (uses_lexical(model.mode)) {
    auto dropped = nn::dropout(*in.lexical, model.lexical.input_dropout_p, mode, rng);
    c.lexical_in = std::move(dropped.output);
    c.lexical_mask = std::move(dropped.mask);
    c.bottleneck_out = nn::dense(c.lexical_in, p.bottleneck, nn::Activation::kRelu);
    std::copy(c.bottleneck_out.values().begin(), c.bottleneck_out.values().end(), c.fused.data() + offset);
  }
  c.logits = nn::dense(c.fused, p.output, nn::Activation::kIdentity);
  return c.logits;
}

// Class probabilities in (None, Accented) order.
template <typename Real>
std::vector<Real> forward(const LexicoAcousticModel<Real>& model, const ModelInput<Real>& in, nn::Mode mode,
                          std::mt19937_64& rng) {
  const Tensor<Real> logits = forward_logits(model, in, mode, rng);
  return nn::softmax<Real>(logits.span());
}

// Ties go to None.
template <typename Real>
AccentLabel predict_from_logits(const Tensor<Real>& logits) {
  return logits[1] > logits[0] ? AccentLabel::kAccented : AccentLabel::kNone;
}

template <typename Real>
AccentLabel predict_from_probs(std::span<const Real> probs) {
  return probs[1] > probs[0] ? AccentLabel::kAccented : AccentLabel::kNone;
}

template <typename Real>
AccentLabel predict(const LexicoAcousticModel<Real>& model, const ModelInput<Real>& in) {
  std::mt19937_64 unused(0);
  const auto probs = forward(model, in, nn::Mode::kEval, unused);
  return predict_from_probs<Real>(probs);
}

// Accumulates d loss / d params for one cached forward pass into grads.
template <typename Real>
void backward(const LexicoAcousticModel<Real>& model, const ModelInput<Real>& in, ForwardCache<Real>& c,
              const Tensor<Real>& grad_logits, ModelParams<Real>& grads) {
  const auto& p = model.params;
  Tensor<Real> grad_fused;
  nn::dense_backward(c.fused, c.logits, p.output, nn::Activation::kIdentity, grad_logits, grads.output, &grad_fused);
  std::size_t offset = 0;
  if (uses_acoustic(model.mode)) {
    const std::size_t width = c.pooled.output.size();
    Tensor<Real> grad_pooled({width});
    std::copy_n(grad_fused.data(), width, grad_pooled.data());
    grad_pooled = nn::dropout_backward(c.acoustic_mask, grad_pooled);
    Tensor<Real> grad_conv2 = nn::maxpool_over_time_backward(c.conv2_out.shape(), c.pooled.argmax, grad_pooled);
    detail::relu_backward_inplace(c.conv2_out, grad_conv2);
    Tensor<Real> grad_conv1;
    nn::conv2d_backward(c.conv1_out, p.conv2, grad_conv2, grads.conv2, &grad_conv1, &c.conv2_ws);
    detail::relu_backward_inplace(c.conv1_out, grad_conv1);
    nn::conv2d_backward(*in.acoustic, p.conv1, grad_conv1, grads.conv1, static_cast<Tensor<Real>*>(nullptr),
                        &c.conv1_ws);
    offset = width;
  }
  if (uses_lexical(model.mode)) {
    const std::size_t width = c.bottleneck_out.size();
    Tensor<Real> grad_b({width});
    std::copy_n(grad_fused.data() + offset, width, grad_b.data());
    nn::dense_backward(c.lexical_in, c.bottleneck_out, p.bottleneck, nn::Activation::kRelu, grad_b, grads.bottleneck,
                       static_cast<Tensor<Real>*>(nullptr));
  }
}

// lambda_acoustic * |acoustic weights|^2 + lambda_lexical * |lexical weights|^2.
// Adds the penalty gradient into grads (when non-null) and returns the penalty.
template <typename Real>
double l2_regularize(const LexicoAcousticModel<Real>& model, ModelParams<Real>* grads) {
  const auto& p = model.params;
  const double la = model.acoustic.l2_lambda;
  const double ll = model.lexical.l2_lambda;
  double penalty = 0.0;
  auto add = [&](const Tensor<Real>& w, Tensor<Real>* g, double lambda, std::size_t begin, std::size_t end,
                 std::size_t stride, std::size_t rows) {
    // Entries [r * stride + begin, r * stride + end) for r < rows.
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t i = r * stride + begin; i < r * stride + end; ++i) {
        const double v = static_cast<double>(w[i]);
        penalty += lambda * v * v;
        if (g) (*g)[i] += static_cast<Real>(2.0 * lambda * v);
      }
    }
  };
  if (uses_acoustic(model.mode)) {
    add(p.conv1.kernels, grads ? &grads->conv1.kernels : nullptr, la, 0, p.conv1.kernels.size(), 0, 1);
    add(p.conv2.kernels, grads ? &grads->conv2.kernels : nullptr, la, 0, p.conv2.kernels.size(), 0, 1);
  }
  if (uses_lexical(model.mode)) {
    add(p.bottleneck.weights, grads ? &grads->bottleneck.weights : nullptr, ll, 0, p.bottleneck.weights.size(), 0,
        1);
  }
  const std::size_t width = model.fused_width();
  const std::size_t aw = model.acoustic_width();
  Tensor<Real>* go = grads ? &grads->output.weights : nullptr;
  add(p.output.weights, go, la, 0, aw, width, kNumClasses);
  add(p.output.weights, go, ll, aw, width, width, kNumClasses);
  return penalty;
}

template <typename Real>
struct LabeledExample {
  Tensor<Real> acoustic;  // empty when the mode has no acoustic branch
  Tensor<Real> lexical;   // empty when the mode has no lexical branch
  AccentLabel gold = AccentLabel::kNone;

  ModelInput<Real> input() const {
    return {acoustic.empty() ? nullptr : &acoustic, lexical.empty() ? nullptr : &lexical};
  }
};

struct LossValue {
  double loss = 0.0;       // mean cross-entropy + both L2 terms
  double data_loss = 0.0;  // mean cross-entropy
  double penalty = 0.0;
};

// Mean loss over the batch and its gradient (written into grads, which is reset).
template <typename Real>
LossValue loss_and_grads(const LexicoAcousticModel<Real>& model, std::span<const LabeledExample<Real>* const> batch,
                         nn::Mode mode, std::mt19937_64& rng, ModelParams<Real>& grads) {
  if (batch.empty()) throw Error("loss_and_grads: empty batch");
  if (grads.output.weights.shape() != model.params.output.weights.shape()) grads = model.params.zeros_like();
  for (auto* t : grads.tensors()) t->zero();

  ForwardCache<Real> cache;
  double data = 0.0;
  const Real scale = static_cast<Real>(1.0 / static_cast<double>(batch.size()));
  for (const auto* ex : batch) {
    const auto in = ex->input();
    const Tensor<Real> logits = forward_logits(model, in, mode, rng, &cache);
    auto x = nn::softmax_xent(logits, static_cast<std::size_t>(ex->gold));
    data += x.loss;
    for (auto& g : x.grad_logits.values()) g *= scale;
    backward(model, in, cache, x.grad_logits, grads);
  }
  LossValue v;
  v.data_loss = data / static_cast<double>(batch.size());
  v.penalty = l2_regularize(model, &grads);
  v.loss = v.data_loss + v.penalty;
  return v;
}

template <typename Real>
LossValue evaluate_loss(const LexicoAcousticModel<Real>& model, std::span<const LabeledExample<Real>* const> batch) {
  std::mt19937_64 unused(0);
  double data = 0.0;
  for (const auto* ex : batch) {
    const auto logits = forward_logits(model, ex->input(), nn::Mode::kEval, unused);
    data += nn::softmax_xent(logits, static_cast<std::size_t>(ex->gold)).loss;
  }
  LossValue v;
  v.data_loss = data / static_cast<double>(batch.size());
  v.penalty = l2_regularize<Real>(model, nullptr);
  v.loss = v.data_loss + v.penalty;
  return v;
}

template <typename Real>
void adam_update(LexicoAcousticModel<Real>& model, ModelParams<Real>& grads, nn::AdamState<Real>& state) {
  auto params = model.params.tensors();
  auto g = grads.tensors();
  std::vector<const Tensor<Real>*> cg(g.begin(), g.end());
  nn::adam_step<Real>(params, cg, state);
}

template <typename Real>
nn::Checkpoint to_checkpoint(const LexicoAcousticModel<Real>& model, std::uint64_t seed = 0,
                             const std::string& config_hash = "") {
  nn::Checkpoint ckpt;
  ckpt.seed = seed;
  ckpt.config_hash = config_hash;
  const auto names = model.params.names();
  const auto tensors = model.params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) ckpt.tensors.push_back({names[i], tensors[i]->template cast<double>()});
  return ckpt;
}

// Loads tensors by name into a model whose layout was created by build_model.
template <typename Real>
void load_from_checkpoint(LexicoAcousticModel<Real>& model, const nn::Checkpoint& ckpt) {
  const auto names = model.params.names();
  auto tensors = model.params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto* t = ckpt.find(names[i]);
    if (!t) throw Error("checkpoint lacks tensor " + names[i]);
    if (t->shape() != tensors[i]->shape()) {
      throw Error("checkpoint tensor " + names[i] + " has shape " + nn::shape_string(t->shape()) + ", model expects " +
                  nn::shape_string(tensors[i]->shape()));
    }
    *tensors[i] = t->template cast<Real>();
  }
}

}  // namespace pitchaccent

#endif  // PITCHACCENT_MODEL_HPP

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

#ifndef PITCHACCENT_NN_ADAM_HPP
#define PITCHACCENT_NN_ADAM_HPP

#include <cmath>
#include <span>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/nn/tensor.hpp"

namespace pitchaccent::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Real>
struct AdamState {
  AdamOptions options;
  long step_count = 0;
  std::vector<Tensor<Real>> first_moment;
  std::vector<Tensor<Real>> second_moment;
};

// Bias-corrected Adam. Moments are created as zeros on the first call.
template <typename Real>
void adam_step(std::span<Tensor<Real>* const> params, std::span<const Tensor<Real>* const> grads,
               AdamState<Real>& state) {
  if (params.size() != grads.size()) throw Error("adam_step: parameter/gradient count mismatch");
  if (state.first_moment.empty()) {
    for (const auto* p : params) {
      state.first_moment.emplace_back(p->shape());
      state.second_moment.emplace_back(p->shape());
    }
  }
  if (state.first_moment.size() != params.size()) throw Error("adam_step: state does not match parameters");

  ++state.step_count;
  const auto& o = state.options;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step_count));
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor<Real>& p = *params[t];
    const Tensor<Real>& g = *grads[t];
    if (g.shape() != p.shape() || state.first_moment[t].shape() != p.shape()) {
      throw Error("adam_step: shape mismatch for tensor " + std::to_string(t));
    }
    Real* m = state.first_moment[t].data();
    Real* v = state.second_moment[t].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = o.beta1 * m[i] + (1.0 - o.beta1) * gi;
      const double vi = o.beta2 * v[i] + (1.0 - o.beta2) * gi * gi;
      m[i] = static_cast<Real>(mi);
      v[i] = static_cast<Real>(vi);
      const double m_hat = mi / c1;
      const double v_hat = vi / c2;
      p[i] = static_cast<Real>(static_cast<double>(p[i]) - o.lr * m_hat / (std::sqrt(v_hat) + o.eps));
    }
  }
}

}  // namespace pitchaccent::nn

#endif  // PITCHACCENT_NN_ADAM_HPP

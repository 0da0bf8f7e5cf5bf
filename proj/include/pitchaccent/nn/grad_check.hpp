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

// Central finite-difference check of analytic gradients.

#ifndef PITCHACCENT_NN_GRAD_CHECK_HPP
#define PITCHACCENT_NN_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pitchaccent/common.hpp"
#include "pitchaccent/nn/tensor.hpp"

namespace pitchaccent::nn {

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::size_t samples = 200;   // total entries checked (all of them if fewer exist)
  std::size_t per_tensor = 4;  // minimum entries drawn from every tensor
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline double relative_error(double analytic, double numeric) {
  const double den = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / den;
}

// loss() must recompute the scalar objective from the current contents of
// params; analytic[i] holds d loss / d params[i] at the unperturbed point.
inline GradCheckResult grad_check(const std::function<double()>& loss, std::span<Tensor<double>* const> params,
                                  std::span<const Tensor<double>* const> analytic, const GradCheckOptions& opt = {}) {
  if (params.size() != analytic.size()) throw Error("grad_check: parameter/gradient count mismatch");
  std::size_t total = 0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t]->shape() != analytic[t]->shape()) throw Error("grad_check: shape mismatch");
    total += params[t]->size();
  }

  // (tensor, index) pairs to probe.
  std::vector<std::pair<std::size_t, std::size_t>> probes;
  if (total <= opt.samples) {
    for (std::size_t t = 0; t < params.size(); ++t) {
      for (std::size_t i = 0; i < params[t]->size(); ++i) probes.emplace_back(t, i);
    }
  } else {
    std::mt19937_64 rng(opt.seed);
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t t = 0; t < params.size(); ++t) {
      std::vector<std::size_t> idx(params[t]->size());
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      const std::size_t take = std::min(opt.per_tensor, idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) (k < take ? probes : pool).emplace_back(t, idx[k]);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t k = 0; probes.size() < opt.samples && k < pool.size(); ++k) probes.push_back(pool[k]);
  }

  GradCheckResult r;
  for (const auto& [t, i] : probes) {
    double& x = (*params[t])[i];
    const double saved = x;
    x = saved + opt.epsilon;
    const double up = loss();
    x = saved - opt.epsilon;
    const double down = loss();
    x = saved;
    const double numeric = (up - down) / (2.0 * opt.epsilon);
    const double a = (*analytic[t])[i];
    const double err = relative_error(a, numeric);
    ++r.checked;
    if (r.checked == 1 || err > r.max_relative_error) {
      r.max_relative_error = err;
      r.worst_tensor = t;
      r.worst_index = i;
      r.worst_analytic = a;
      r.worst_numeric = numeric;
    }
  }
  return r;
}

}  // namespace pitchaccent::nn

#endif  // PITCHACCENT_NN_GRAD_CHECK_HPP

// Copyright 2026 The pbel Authors.
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

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pbel/numerics/tensor.hpp"

namespace pbel::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment estimates for one ordered parameter list. The parameter list passed
// to adam_step must keep the same order and shapes between calls.
template <typename Scalar>
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor<Scalar>> m;
  std::vector<Tensor<Scalar>> v;

  AdamState() = default;
  explicit AdamState(AdamConfig c) : config(c) {}
};

// One bias-corrected Adam update using the gradients stored on `params`.
template <typename Scalar>
void adam_step(std::span<Parameter<Scalar>* const> params, AdamState<Scalar>& state) {
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(Tensor<Scalar>::zeros(p->value.shape));
      state.v.push_back(Tensor<Scalar>::zeros(p->value.shape));
    }
  }
  if (state.m.size() != params.size()) {
    throw DimensionError("adam_step: parameter count changed between steps");
  }
  ++state.step;
  const auto& c = state.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = *params[i];
    auto& m = state.m[i].data;
    auto& v = state.v[i].data;
    if (!p.grad.same_shape(p.value) || !state.m[i].same_shape(p.value)) {
      throw DimensionError("adam_step: shape mismatch for parameter " + p.name);
    }
    auto& w = p.value.data;
    const auto& g = p.grad.data;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g[k];
      const double mk = c.beta1 * m[k] + (1.0 - c.beta1) * gk;
      const double vk = c.beta2 * v[k] + (1.0 - c.beta2) * gk * gk;
      m[k] = static_cast<Scalar>(mk);
      v[k] = static_cast<Scalar>(vk);
      const double mhat = mk / correction1;
      const double vhat = vk / correction2;
      w[k] = static_cast<Scalar>(w[k] - c.lr * mhat / (std::sqrt(vhat) + c.eps));
    }
  }
}

template <typename Scalar>
double global_grad_norm(std::span<Parameter<Scalar>* const> params) {
  double sq = 0.0;
  for (const auto* p : params) {
    for (Scalar g : p->grad.data) sq += static_cast<double>(g) * g;
  }
  return std::sqrt(sq);
}

// Rescales all gradients so their joint L2 norm is at most `max_norm`.
// Returns the norm before clipping.
template <typename Scalar>
double clip_grad_norm(std::span<Parameter<Scalar>* const> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm) {
    const auto s = static_cast<Scalar>(max_norm / norm);
    for (auto* p : params) {
      for (auto& g : p->grad.data) g *= s;
    }
  }
  return norm;
}

template <typename Scalar>
void zero_grads(std::span<Parameter<Scalar>* const> params) {
  for (auto* p : params) p->zero_grad();
}

template <typename Scalar>
bool grads_finite(std::span<Parameter<Scalar>* const> params) {
  for (const auto* p : params) {
    if (!p->grad.all_finite()) return false;
  }
  return true;
}

}  // namespace pbel::nn

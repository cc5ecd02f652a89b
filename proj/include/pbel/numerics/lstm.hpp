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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pbel/numerics/ops.hpp"
#include "pbel/numerics/random.hpp"

namespace pbel::nn {

inline constexpr double kInitRange = 0.08;
inline constexpr double kForgetBias = 1.0;

// Gate blocks are laid out [input | forget | candidate | output] along the
// 4·hidden axis of W, U and b.
template <typename Scalar>
struct LstmWeights {
  Parameter<Scalar> W;  // input_dim × 4h
  Parameter<Scalar> U;  // h × 4h
  Parameter<Scalar> b;  // 1 × 4h

  std::size_t input_dim() const { return W.value.rows(); }
  std::size_t hidden() const { return U.value.rows(); }

  static LstmWeights init(const std::string& prefix, std::size_t input_dim,
                          std::size_t hidden, Rng& rng) {
    auto uniform = [&rng](std::size_t rows, std::size_t cols) {
      auto t = Tensor<Scalar>::zeros({rows, cols});
      for (auto& x : t.data) {
        x = static_cast<Scalar>(rng.uniform(-kInitRange, kInitRange));
      }
      return t;
    };
    LstmWeights w;
    w.W = Parameter<Scalar>(prefix + ".W", uniform(input_dim, 4 * hidden));
    w.U = Parameter<Scalar>(prefix + ".U", uniform(hidden, 4 * hidden));
    auto bias = Tensor<Scalar>::zeros({1, 4 * hidden});
    for (std::size_t k = hidden; k < 2 * hidden; ++k) {
      bias.data[k] = static_cast<Scalar>(kForgetBias);
    }
    w.b = Parameter<Scalar>(prefix + ".b", std::move(bias));
    return w;
  }

  std::vector<Parameter<Scalar>*> parameters() { return {&W, &U, &b}; }
  std::vector<const Parameter<Scalar>*> parameters() const {
    return {&W, &U, &b};
  }
};

// Gate pre-activations x·W + h_prev·U + b, where h_prev is the left half of
// the packed state `hc` = [h | c].
template <typename Scalar>
NodeId lstm_gates(Graph<Scalar>& g, NodeId x, NodeId hc, NodeId W, NodeId U,
                  NodeId b) {
  const auto& X = g.value(x);
  const auto& HC = g.value(hc);
  const auto& Wv = g.value(W);
  const auto& Uv = g.value(U);
  const auto& Bv = g.value(b);
  const std::size_t h = Uv.rows();
  detail::require(Wv.cols() == 4 * h && Uv.cols() == 4 * h &&
                      Bv.size() == 4 * h,
                  "lstm_gates", "weights disagree on hidden size");
  detail::require(X.cols() == Wv.rows(), "lstm_gates",
                  "input " + detail::dims(X) + " vs W " + detail::dims(Wv));
  detail::require(HC.cols() == 2 * h && HC.rows() == X.rows(), "lstm_gates",
                  "state " + detail::dims(HC) + " vs hidden " + std::to_string(h));
  auto pre = Tensor<Scalar>::zeros({X.rows(), 4 * h});
  pre.mat().noalias() = X.mat() * Wv.mat();
  pre.mat().noalias() += HC.mat().leftCols(h) * Uv.mat();
  pre.mat().rowwise() += Bv.mat().row(0);
  return g.add(
      OpKind::kLstmGates, {x, hc, W, U, b}, std::move(pre),
      [x, hc, W, U, b, h](Graph<Scalar>& g, NodeId self) {
        const auto& G = g.grad(self);
        if (g.requires_grad(x)) {
          g.grad(x).mat().noalias() += G.mat() * g.value(W).mat().transpose();
        }
        if (g.requires_grad(W)) {
          g.grad(W).mat().noalias() += g.value(x).mat().transpose() * G.mat();
        }
        if (g.requires_grad(hc)) {
          g.grad(hc).mat().leftCols(h).noalias() +=
              G.mat() * g.value(U).mat().transpose();
        }
        if (g.requires_grad(U)) {
          g.grad(U).mat().noalias() +=
              g.value(hc).mat().leftCols(h).transpose() * G.mat();
        }
        if (g.requires_grad(b)) {
          g.grad(b).mat().row(0) += G.mat().colwise().sum();
        }
      });
}

// Applies the gate nonlinearities and the cell recurrence:
//   c' = σ(f)·c + σ(i)·tanh(g),  h' = σ(o)·tanh(c')
// and returns the packed state [h' | c']. Rows whose mask entry is 0 carry
// their previous state through unchanged (padding of shorter sequences).
template <typename Scalar>
NodeId lstm_state(Graph<Scalar>& g, NodeId pre, NodeId hc_prev,
                  std::vector<std::uint8_t> mask = {}) {
  const auto& P = g.value(pre);
  const auto& HC = g.value(hc_prev);
  const std::size_t m = P.rows();
  const std::size_t h = P.cols() / 4;
  detail::require(P.cols() == 4 * h && HC.cols() == 2 * h && HC.rows() == m,
                  "lstm_state", detail::dims(P) + " vs " + detail::dims(HC));
  if (mask.empty()) mask.assign(m, 1);
  detail::require(mask.size() == m, "lstm_state", "mask length mismatch");

  auto out = Tensor<Scalar>::zeros({m, 2 * h});
  // Saved activations per row: i, f, g, o, tanh(c').
  auto acts = std::make_shared<Tensor<Scalar>>(Tensor<Scalar>::zeros({m, 5 * h}));
  for (std::size_t r = 0; r < m; ++r) {
    const auto p = P.row(r);
    const auto prev = HC.row(r);
    auto o = out.row(r);
    if (!mask[r]) {
      std::copy(prev.begin(), prev.end(), o.begin());
      continue;
    }
    auto a = acts->row(r);
    for (std::size_t k = 0; k < h; ++k) {
      const Scalar ig = detail::sigmoid(p[k]);
      const Scalar fg = detail::sigmoid(p[h + k]);
      const Scalar cg = std::tanh(p[2 * h + k]);
      const Scalar og = detail::sigmoid(p[3 * h + k]);
      const Scalar c = fg * prev[h + k] + ig * cg;
      const Scalar tc = std::tanh(c);
      a[k] = ig;
      a[h + k] = fg;
      a[2 * h + k] = cg;
      a[3 * h + k] = og;
      a[4 * h + k] = tc;
      o[k] = og * tc;
      o[h + k] = c;
    }
  }
  return g.add(
      OpKind::kLstmState, {pre, hc_prev}, std::move(out),
      [pre, hc_prev, h, acts, mask = std::move(mask)](Graph<Scalar>& g,
                                                       NodeId self) {
        const auto& G = g.grad(self);
        const auto& HC = g.value(hc_prev);
        Tensor<Scalar>* GP = g.requires_grad(pre) ? &g.grad(pre) : nullptr;
        Tensor<Scalar>* GH = g.requires_grad(hc_prev) ? &g.grad(hc_prev) : nullptr;
        for (std::size_t r = 0; r < mask.size(); ++r) {
          const auto gout = G.row(r);
          if (!mask[r]) {
            if (GH) {
              auto gh = GH->row(r);
              for (std::size_t k = 0; k < 2 * h; ++k) gh[k] += gout[k];
            }
            continue;
          }
          const auto a = acts->row(r);
          const auto prev = HC.row(r);
          std::span<Scalar> gp = GP ? GP->row(r) : std::span<Scalar>();
          std::span<Scalar> gh = GH ? GH->row(r) : std::span<Scalar>();
          for (std::size_t k = 0; k < h; ++k) {
            const Scalar ig = a[k], fg = a[h + k], cg = a[2 * h + k],
                         og = a[3 * h + k], tc = a[4 * h + k];
            const Scalar dh = gout[k];
            const Scalar dc = gout[h + k] + dh * og * (Scalar(1) - tc * tc);
            if (GP) {
              gp[k] += dc * cg * ig * (Scalar(1) - ig);
              gp[h + k] += dc * prev[h + k] * fg * (Scalar(1) - fg);
              gp[2 * h + k] += dc * ig * (Scalar(1) - cg * cg);
              gp[3 * h + k] += dh * tc * og * (Scalar(1) - og);
            }
            if (GH) gh[h + k] += dc * fg;
          }
        }
      });
}

// One LSTM step on separate h and c nodes. `Weights` is LstmWeights<Scalar>
// (gradient-tracked) or const LstmWeights<Scalar> (inference).
struct LstmStep {
  NodeId h;
  NodeId c;
};

template <typename Scalar, typename Weights>
LstmStep lstm_cell_packed(Graph<Scalar>& g, NodeId x, NodeId hc, Weights& w) {
  const std::size_t h = w.hidden();
  const NodeId pre = lstm_gates(g, x, hc, g.parameter(w.W), g.parameter(w.U),
                                g.parameter(w.b));
  const NodeId next = lstm_state(g, pre, hc);
  return {slice_cols(g, next, 0, h), slice_cols(g, next, h, h)};
}

template <typename Scalar, typename Weights>
LstmStep lstm_cell(Graph<Scalar>& g, NodeId x, NodeId h_prev, NodeId c_prev,
                   Weights& w) {
  const NodeId hc = concat_cols(g, h_prev, c_prev);
  return lstm_cell_packed(g, x, hc, w);
}

}  // namespace pbel::nn

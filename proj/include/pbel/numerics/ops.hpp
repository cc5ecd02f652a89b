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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pbel/numerics/graph.hpp"

namespace pbel::nn {

namespace detail {

inline void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw DimensionError(std::string(op) + ": " + what);
}

template <typename Scalar>
std::string dims(const Tensor<Scalar>& t) {
  return shape_string(t.shape);
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

}  // namespace detail

// C = A·B for A[m×k], B[k×n].
template <typename Scalar>
NodeId matmul(Graph<Scalar>& g, NodeId a, NodeId b) {
  const auto& A = g.value(a);
  const auto& B = g.value(b);
  detail::require(A.cols() == B.rows(), "matmul",
                  "inner dimensions differ: " + detail::dims(A) + " · " +
                      detail::dims(B));
  auto C = Tensor<Scalar>::zeros({A.rows(), B.cols()});
  C.mat().noalias() = A.mat() * B.mat();
  return g.add(OpKind::kMatmul, {a, b}, std::move(C),
               [a, b](Graph<Scalar>& g, NodeId self) {
                 const auto& G = g.grad(self);
                 if (g.requires_grad(a)) {
                   g.grad(a).mat().noalias() +=
                       G.mat() * g.value(b).mat().transpose();
                 }
                 if (g.requires_grad(b)) {
                   g.grad(b).mat().noalias() +=
                       g.value(a).mat().transpose() * G.mat();
                 }
               });
}

// C = A·Bᵀ for A[m×k], B[n×k].
template <typename Scalar>
NodeId matmul_nt(Graph<Scalar>& g, NodeId a, NodeId b) {
  const auto& A = g.value(a);
  const auto& B = g.value(b);
  detail::require(A.cols() == B.cols(), "matmul_nt",
                  "inner dimensions differ: " + detail::dims(A) + " · " +
                      detail::dims(B) + "ᵀ");
  auto C = Tensor<Scalar>::zeros({A.rows(), B.rows()});
  C.mat().noalias() = A.mat() * B.mat().transpose();
  return g.add(OpKind::kMatmulNT, {a, b}, std::move(C),
               [a, b](Graph<Scalar>& g, NodeId self) {
                 const auto& G = g.grad(self);
                 if (g.requires_grad(a)) {
                   g.grad(a).mat().noalias() += G.mat() * g.value(b).mat();
                 }
                 if (g.requires_grad(b)) {
                   g.grad(b).mat().noalias() +=
                       G.mat().transpose() * g.value(a).mat();
                 }
               });
}

template <typename Scalar>
NodeId add(Graph<Scalar>& g, NodeId a, NodeId b) {
  const auto& A = g.value(a);
  const auto& B = g.value(b);
  detail::require(A.rows() == B.rows() && A.cols() == B.cols(), "add",
                  detail::dims(A) + " vs " + detail::dims(B));
  Tensor<Scalar> C = A;
  C.mat() += B.mat();
  return g.add(OpKind::kAdd, {a, b}, std::move(C),
               [a, b](Graph<Scalar>& g, NodeId self) {
                 const auto& G = g.grad(self);
                 if (g.requires_grad(a)) g.grad(a).mat() += G.mat();
                 if (g.requires_grad(b)) g.grad(b).mat() += G.mat();
               });
}

// A[m×n] + r[1×n] broadcast over rows.
template <typename Scalar>
NodeId add_row(Graph<Scalar>& g, NodeId a, NodeId r) {
  const auto& A = g.value(a);
  const auto& R = g.value(r);
  detail::require(R.rows() == 1 && R.cols() == A.cols(), "add_row",
                  detail::dims(A) + " + " + detail::dims(R));
  Tensor<Scalar> C = A;
  C.mat().rowwise() += R.mat().row(0);
  return g.add(OpKind::kAddRow, {a, r}, std::move(C),
               [a, r](Graph<Scalar>& g, NodeId self) {
                 const auto& G = g.grad(self);
                 if (g.requires_grad(a)) g.grad(a).mat() += G.mat();
                 if (g.requires_grad(r)) {
                   g.grad(r).mat().row(0) += G.mat().colwise().sum();
                 }
               });
}

template <typename Scalar>
NodeId sub(Graph<Scalar>& g, NodeId a, NodeId b) {
  const auto& A = g.value(a);
  const auto& B = g.value(b);
  detail::require(A.rows() == B.rows() && A.cols() == B.cols(), "sub",
                  detail::dims(A) + " vs " + detail::dims(B));
  Tensor<Scalar> C = A;
  C.mat() -= B.mat();
  return g.add(OpKind::kSub, {a, b}, std::move(C),
               [a, b](Graph<Scalar>& g, NodeId self) {
                 const auto& G = g.grad(self);
                 if (g.requires_grad(a)) g.grad(a).mat() += G.mat();
                 if (g.requires_grad(b)) g.grad(b).mat() -= G.mat();
               });
}

// Elementwise product.
template <typename Scalar>
NodeId mul(Graph<Scalar>& g, NodeId a, NodeId b) {
  const auto& A = g.value(a);
  const auto& B = g.value(b);
  detail::require(A.rows() == B.rows() && A.cols() == B.cols(), "mul",
                  detail::dims(A) + " vs " + detail::dims(B));
  Tensor<Scalar> C = A;
  C.mat().array() *= B.mat().array();
  return g.add(OpKind::kMul, {a, b}, std::move(C),
               [a, b](Graph<Scalar>& g, NodeId self) {
                 const auto& G = g.grad(self);
                 if (g.requires_grad(a)) {
                   g.grad(a).mat().array() +=
                       G.mat().array() * g.value(b).mat().array();
                 }
                 if (g.requires_grad(b)) {
                   g.grad(b).mat().array() +=
                       G.mat().array() * g.value(a).mat().array();
                 }
               });
}

template <typename Scalar>
NodeId scale(Graph<Scalar>& g, NodeId a, Scalar s) {
  Tensor<Scalar> C = g.value(a);
  C.mat() *= s;
  return g.add(OpKind::kScale, {a}, std::move(C),
               [a, s](Graph<Scalar>& g, NodeId self) {
                 g.grad(a).mat() += s * g.grad(self).mat();
               });
}

template <typename Scalar>
NodeId sigmoid(Graph<Scalar>& g, NodeId a) {
  Tensor<Scalar> Y = g.value(a);
  for (auto& y : Y.data) y = detail::sigmoid(y);
  return g.add(OpKind::kSigmoid, {a}, std::move(Y),
               [a](Graph<Scalar>& g, NodeId self) {
                 const auto Y = g.value(self).mat().array();
                 g.grad(a).mat().array() +=
                     g.grad(self).mat().array() * Y * (Scalar(1) - Y);
               });
}

template <typename Scalar>
NodeId tanh(Graph<Scalar>& g, NodeId a) {
  Tensor<Scalar> Y = g.value(a);
  for (auto& y : Y.data) y = std::tanh(y);
  return g.add(OpKind::kTanh, {a}, std::move(Y),
               [a](Graph<Scalar>& g, NodeId self) {
                 const auto Y = g.value(self).mat().array();
                 g.grad(a).mat().array() +=
                     g.grad(self).mat().array() * (Scalar(1) - Y * Y);
               });
}

// Rows of `table` selected by `ids` (embedding lookup).
template <typename Scalar>
NodeId gather_rows(Graph<Scalar>& g, NodeId table,
                   std::vector<std::int32_t> ids) {
  const auto& T = g.value(table);
  detail::require(!ids.empty(), "gather_rows", "no ids");
  const std::size_t d = T.cols();
  auto out = Tensor<Scalar>::zeros({ids.size(), d});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto id = ids[r];
    detail::require(id >= 0 && static_cast<std::size_t>(id) < T.rows(),
                    "gather_rows", "id out of range");
    std::copy_n(T.row(static_cast<std::size_t>(id)).begin(), d,
                out.row(r).begin());
  }
  return g.add(OpKind::kGatherRows, {table}, std::move(out),
               [table, ids = std::move(ids)](Graph<Scalar>& g, NodeId self) {
                 const auto& G = g.grad(self);
                 auto& GT = g.grad(table);
                 for (std::size_t r = 0; r < ids.size(); ++r) {
                   auto dst = GT.row(static_cast<std::size_t>(ids[r]));
                   auto src = G.row(r);
                   for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
                 }
               });
}

template <typename Scalar>
NodeId slice_cols(Graph<Scalar>& g, NodeId a, std::size_t begin,
                  std::size_t count) {
  const auto& A = g.value(a);
  detail::require(count > 0 && begin + count <= A.cols(), "slice_cols",
                  "range out of bounds for " + detail::dims(A));
  auto out = Tensor<Scalar>::zeros({A.rows(), count});
  out.mat() = A.mat().middleCols(begin, count);
  return g.add(OpKind::kSliceCols, {a}, std::move(out),
               [a, begin, count](Graph<Scalar>& g, NodeId self) {
                 g.grad(a).mat().middleCols(begin, count) += g.grad(self).mat();
               });
}

template <typename Scalar>
NodeId concat_cols(Graph<Scalar>& g, NodeId a, NodeId b) {
  const auto& A = g.value(a);
  const auto& B = g.value(b);
  detail::require(A.rows() == B.rows(), "concat_cols",
                  detail::dims(A) + " | " + detail::dims(B));
  const std::size_t ca = A.cols();
  const std::size_t cb = B.cols();
  auto out = Tensor<Scalar>::zeros({A.rows(), ca + cb});
  out.mat().leftCols(ca) = A.mat();
  out.mat().rightCols(cb) = B.mat();
  return g.add(OpKind::kConcatCols, {a, b}, std::move(out),
               [a, b, ca, cb](Graph<Scalar>& g, NodeId self) {
                 const auto& G = g.grad(self);
                 if (g.requires_grad(a)) g.grad(a).mat() += G.mat().leftCols(ca);
                 if (g.requires_grad(b)) {
                   g.grad(b).mat() += G.mat().rightCols(cb);
                 }
               });
}

// Scales every row to unit L2 norm. Norms are accumulated in 64 bits.
template <typename Scalar>
NodeId row_normalize(Graph<Scalar>& g, NodeId a) {
  const auto& A = g.value(a);
  Tensor<Scalar> Y = A;
  std::vector<double> norms(A.rows());
  for (std::size_t r = 0; r < A.rows(); ++r) {
    norms[r] = l2_norm(A.row(r));
    if (!(norms[r] > 0.0)) {
      throw DegenerateVectorError("row_normalize: row " + std::to_string(r) +
                                  " has zero norm");
    }
    for (auto& y : Y.row(r)) y = static_cast<Scalar>(y / norms[r]);
  }
  return g.add(OpKind::kRowNormalize, {a}, std::move(Y),
               [a, norms = std::move(norms)](Graph<Scalar>& g, NodeId self) {
                 const auto& Y = g.value(self);
                 const auto& G = g.grad(self);
                 auto& GA = g.grad(a);
                 for (std::size_t r = 0; r < Y.rows(); ++r) {
                   const auto y = Y.row(r);
                   const auto gy = G.row(r);
                   const double proj = dot(gy, y);
                   auto ga = GA.row(r);
                   for (std::size_t c = 0; c < y.size(); ++c) {
                     ga[c] += static_cast<Scalar>((gy[c] - proj * y[c]) / norms[r]);
                   }
                 }
               });
}

// cos(a, b) for two vectors of equal length; 1×1 result.
template <typename Scalar>
NodeId cosine(Graph<Scalar>& g, NodeId a, NodeId b) {
  const auto& A = g.value(a);
  const auto& B = g.value(b);
  detail::require(A.size() == B.size(), "cosine",
                  detail::dims(A) + " vs " + detail::dims(B));
  const double na = l2_norm(std::span<const Scalar>(A.data));
  const double nb = l2_norm(std::span<const Scalar>(B.data));
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw DegenerateVectorError("cosine: zero-norm input");
  }
  const double s = dot(std::span<const Scalar>(A.data),
                       std::span<const Scalar>(B.data)) / (na * nb);
  return g.add(
      OpKind::kCosine, {a, b}, Tensor<Scalar>::scalar(static_cast<Scalar>(s)),
      [a, b, na, nb, s](Graph<Scalar>& g, NodeId self) {
        const double gs = g.grad(self).data[0];
        const auto& A = g.value(a).data;
        const auto& B = g.value(b).data;
        if (g.requires_grad(a)) {
          auto& GA = g.grad(a).data;
          for (std::size_t i = 0; i < A.size(); ++i) {
            GA[i] += static_cast<Scalar>(
                gs * (B[i] / (na * nb) - s * A[i] / (na * na)));
          }
        }
        if (g.requires_grad(b)) {
          auto& GB = g.grad(b).data;
          for (std::size_t i = 0; i < B.size(); ++i) {
            GB[i] += static_cast<Scalar>(
                gs * (A[i] / (na * nb) - s * B[i] / (nb * nb)));
          }
        }
      });
}

// max(0, margin - pos + neg) for scalar nodes.
template <typename Scalar>
NodeId hinge(Graph<Scalar>& g, NodeId pos, NodeId neg, Scalar margin) {
  detail::require(g.value(pos).size() == 1 && g.value(neg).size() == 1, "hinge",
                  "similarities must be scalars");
  const Scalar v = std::max(Scalar(0), margin - g.value(pos).item() +
                                           g.value(neg).item());
  return g.add(OpKind::kHinge, {pos, neg}, Tensor<Scalar>::scalar(v),
               [pos, neg](Graph<Scalar>& g, NodeId self) {
                 if (!(g.value(self).item() > Scalar(0))) return;
                 const Scalar gv = g.grad(self).data[0];
                 if (g.requires_grad(pos)) g.grad(pos).data[0] -= gv;
                 if (g.requires_grad(neg)) g.grad(neg).data[0] += gv;
               });
}

// Mean over i of mean over j≠i of max(0, margin - S[i][i] + S[i][j]), where S
// is the square similarity matrix of a minibatch (rows: sources, columns:
// English entries). Off-diagonal columns act as in-batch negatives.
template <typename Scalar>
NodeId in_batch_hinge(Graph<Scalar>& g, NodeId sims, Scalar margin) {
  const auto& S = g.value(sims);
  const std::size_t n = S.rows();
  detail::require(S.cols() == n, "in_batch_hinge", "similarity matrix not square");
  if (n < 2) throw InvalidArgument("in_batch_hinge: batch needs at least 2 pairs");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      row += std::max(0.0, static_cast<double>(margin) - S(i, i) + S(i, j));
    }
    total += row / static_cast<double>(n - 1);
  }
  const double loss = total / static_cast<double>(n);
  return g.add(
      OpKind::kInBatchHinge, {sims},
      Tensor<Scalar>::scalar(static_cast<Scalar>(loss)),
      [sims, margin, n](Graph<Scalar>& g, NodeId self) {
        const auto& S = g.value(sims);
        auto& GS = g.grad(sims);
        const Scalar w = g.grad(self).data[0] /
                         static_cast<Scalar>(n * (n - 1));
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (margin - S(i, i) + S(i, j) > Scalar(0)) {
              GS(i, j) += w;
              GS(i, i) -= w;
            }
          }
        }
      });
}

template <typename Scalar>
NodeId sum(Graph<Scalar>& g, NodeId a) {
  const auto& A = g.value(a);
  double acc = 0.0;
  for (Scalar x : A.data) acc += x;
  return g.add(OpKind::kSum, {a}, Tensor<Scalar>::scalar(static_cast<Scalar>(acc)),
               [a](Graph<Scalar>& g, NodeId self) {
                 const Scalar gv = g.grad(self).data[0];
                 for (auto& x : g.grad(a).data) x += gv;
               });
}

}  // namespace pbel::nn

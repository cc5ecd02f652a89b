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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pbel/error.hpp"

namespace pbel::nn {

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Storage aligned for the widest SIMD unit, so Eigen takes the same
// vectorized path (and summation order) for every buffer.
template <typename Scalar>
using Buffer = std::vector<Scalar, Eigen::aligned_allocator<Scalar>>;

// Dense row-major tensor. Rank-1 tensors behave as 1×n matrices wherever a
// matrix view is needed.
template <typename Scalar>
struct Tensor {
  std::vector<std::size_t> shape;
  Buffer<Scalar> data;
  bool requires_grad = false;

  Tensor() = default;
  Tensor(std::vector<std::size_t> dims, Buffer<Scalar> values,
         bool grad = false)
      : shape(std::move(dims)), data(std::move(values)), requires_grad(grad) {
    check();
  }

  static Tensor zeros(std::vector<std::size_t> dims) {
    const std::size_t n = std::accumulate(dims.begin(), dims.end(),
                                          std::size_t{1}, std::multiplies<>());
    return Tensor(std::move(dims), Buffer<Scalar>(n, Scalar(0)));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols,
                       Buffer<Scalar> values) {
    return Tensor({rows, cols}, std::move(values));
  }

  static Tensor vector(Buffer<Scalar> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
  }

  static Tensor scalar(Scalar value) { return Tensor({1, 1}, {value}); }

  void check() const {
    if (shape.empty()) throw DimensionError("tensor must have rank >= 1");
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d == 0) throw DimensionError("tensor dimensions must be positive");
      n *= d;
    }
    if (n != data.size()) {
      throw DimensionError("tensor shape does not match element count");
    }
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const { return shape.size() == 1 ? 1 : shape[0]; }
  std::size_t cols() const { return data.empty() ? 0 : data.size() / rows(); }
  bool empty() const { return data.empty(); }

  Scalar& operator()(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  Scalar operator()(std::size_t r, std::size_t c) const {
    return data[r * cols() + c];
  }
  Scalar item() const {
    if (data.size() != 1) throw DimensionError("item() needs a 1-element tensor");
    return data[0];
  }

  std::span<Scalar> row(std::size_t r) {
    return std::span<Scalar>(data).subspan(r * cols(), cols());
  }
  std::span<const Scalar> row(std::size_t r) const {
    return std::span<const Scalar>(data).subspan(r * cols(), cols());
  }

  Eigen::Map<RowMatrix<Scalar>> mat() {
    return {data.data(), static_cast<Eigen::Index>(rows()),
            static_cast<Eigen::Index>(cols())};
  }
  Eigen::Map<const RowMatrix<Scalar>> mat() const {
    return {data.data(), static_cast<Eigen::Index>(rows()),
            static_cast<Eigen::Index>(cols())};
  }

  bool all_finite() const {
    return std::all_of(data.begin(), data.end(),
                       [](Scalar x) { return std::isfinite(x); });
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  void fill(Scalar v) { std::fill(data.begin(), data.end(), v); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape == b.shape && a.data == b.data;
  }
};

inline std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Trainable tensor with its gradient accumulator.
template <typename Scalar>
struct Parameter {
  std::string name;
  Tensor<Scalar> value;
  Tensor<Scalar> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<Scalar> v)
      : name(std::move(n)), value(std::move(v)) {
    value.requires_grad = true;
    grad = Tensor<Scalar>::zeros(value.shape);
  }

  void zero_grad() {
    if (grad.shape != value.shape) {
      grad = Tensor<Scalar>::zeros(value.shape);
    } else {
      grad.fill(Scalar(0));
    }
  }
};

// 64-bit accumulated dot product.
template <typename Scalar>
double dot(std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

template <typename Scalar>
double l2_norm(std::span<const Scalar> a) {
  return std::sqrt(dot(a, a));
}

}  // namespace pbel::nn

/* Copyright 2026 The usmae Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "usmae/error.hpp"

namespace usmae::diff {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

/// Cache-line aligned storage. Vectorized kernels peel loops by address, so
/// a fixed alignment keeps floating-point results identical across runs.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

/// Dense row-major tensor. Extents are positive; the element count always
/// equals the product of the extents.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape) : shape_(std::move(shape)) {
    validate_shape();
    values_.assign(shape_numel(shape_), T{0});
  }

  BasicTensor(Shape shape, const std::vector<T>& values)
      : shape_(std::move(shape)), values_(values.begin(), values.end()) {
    validate_shape();
    if (values_.size() != shape_numel(shape_)) {
      throw DimensionError("tensor of shape " + shape_string(shape_) +
                           " given " + std::to_string(values_.size()) +
                           " values");
    }
  }

  static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape)); }

  static BasicTensor full(Shape shape, T value) {
    BasicTensor t(std::move(shape));
    std::fill(t.values_.begin(), t.values_.end(), value);
    return t;
  }

  static BasicTensor scalar(T value) { return BasicTensor({1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  /// Rank-2 view helpers. Rank-1 tensors are treated as a single row.
  std::size_t rows() const { return rank() == 1 ? 1 : shape_[0]; }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  T& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
  }

  std::span<T> row(std::size_t r) {
    return std::span<T>(values_).subspan(r * cols(), cols());
  }
  std::span<const T> row(std::size_t r) const {
    return std::span<const T>(values_).subspan(r * cols(), cols());
  }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](T v) { return std::isfinite(v); });
  }

  /// Throws NumericError naming `what` if any element is NaN or infinite.
  void require_finite(const std::string& what) const {
    if (!all_finite()) throw NumericError(what + ": non-finite value");
  }

  void fill(T value) { std::fill(values_.begin(), values_.end(), value); }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(values_.begin(), values_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  BasicTensor reshaped(Shape shape) const {
    BasicTensor t(std::move(shape));
    if (t.size() != size()) {
      throw DimensionError("cannot reshape " + shape_string(shape_) + " to " +
                           shape_string(t.shape_));
    }
    t.values_ = values_;
    return t;
  }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  void validate_shape() const {
    if (shape_.empty()) throw DimensionError("tensor shape must be non-empty");
    for (std::size_t e : shape_) {
      if (e == 0) {
        throw DimensionError("tensor extents must be positive, got " +
                             shape_string(shape_));
      }
    }
  }

  Shape shape_;
  std::vector<T, AlignedAllocator<T>> values_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

}  // namespace usmae::diff

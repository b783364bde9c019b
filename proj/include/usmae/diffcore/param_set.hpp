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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "usmae/diffcore/tensor.hpp"

namespace usmae::diff {

/// Named trainable tensors, each paired with a gradient of identical shape.
/// Iteration order is insertion order; every loop over parameters (gradient
/// reduction, optimizer updates, serialization) follows it.
template <typename T>
class BasicParamSet {
 public:
  struct Entry {
    std::string name;
    BasicTensor<T> value;
    BasicTensor<T> grad;
  };

  /// Adds a parameter; the gradient starts at zero. Names must be unique.
  BasicTensor<T>& add(std::string name, BasicTensor<T> value) {
    if (index_.contains(name)) {
      throw InvalidArgument("duplicate parameter name '" + name + "'");
    }
    index_.emplace(name, entries_.size());
    BasicTensor<T> grad(value.shape());
    entries_.push_back(Entry{std::move(name), std::move(value), std::move(grad)});
    return entries_.back().value;
  }

  bool contains(std::string_view name) const {
    return index_.contains(std::string(name));
  }

  std::size_t index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
      throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
    }
    return it->second;
  }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  BasicTensor<T>& value(std::string_view name) {
    return entries_[index_of(name)].value;
  }
  const BasicTensor<T>& value(std::string_view name) const {
    return entries_[index_of(name)].value;
  }
  BasicTensor<T>& grad(std::string_view name) {
    return entries_[index_of(name)].grad;
  }
  const BasicTensor<T>& grad(std::string_view name) const {
    return entries_[index_of(name)].grad;
  }

  Entry& operator[](std::size_t i) { return entries_[i]; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }

  std::size_t size() const { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad() {
    for (auto& e : entries_) e.grad.fill(T{0});
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  template <typename U>
  BasicParamSet<U> cast() const {
    BasicParamSet<U> out;
    for (const auto& e : entries_) out.add(e.name, e.value.template cast<U>());
    return out;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ParamSet = BasicParamSet<float>;
using ParamSetD = BasicParamSet<double>;

}  // namespace usmae::diff

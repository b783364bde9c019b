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
#include <numeric>
#include <vector>

namespace usmae::testing {

// Parameters of one pre-LN block counted from its pieces: Q, K, V
// projections d x w with bias, output projection w x d with bias, an MLP
// d -> 2d -> d with biases, and two layer norms.
inline std::size_t block_params(std::size_t d, std::size_t w) {
  const std::size_t qkv = 3 * (d * w + w);
  const std::size_t out = w * d + d;
  const std::size_t mlp = (d * 2 * d + 2 * d) + (2 * d * d + d);
  const std::size_t norms = 2 * (d + d);
  return qkv + out + mlp + norms;
}

// Membership in the top k by full sort: order by score descending, then
// class index ascending.
inline bool topk_by_sort(const std::vector<float>& row, int label, std::size_t k) {
  std::vector<int> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return row[a] > row[b]; });
  return std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), label) !=
         idx.begin() + static_cast<std::ptrdiff_t>(k);
}

// Softmax attention for one sequence, heads sliced out of w-wide rows.
inline std::vector<double> naive_attention(const std::vector<double>& q,
                                           const std::vector<double>& k,
                                           const std::vector<double>& v,
                                           std::size_t n, std::size_t heads,
                                           std::size_t dh) {
  const std::size_t w = heads * dh;
  std::vector<double> out(n * w, 0.0);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> s(n);
      double mx = -1e300;
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0;
        for (std::size_t c = 0; c < dh; ++c) dot += q[i * w + h * dh + c] * k[j * w + h * dh + c];
        s[j] = dot / std::sqrt(static_cast<double>(dh));
        mx = std::max(mx, s[j]);
      }
      double z = 0;
      for (auto& x : s) z += (x = std::exp(x - mx));
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t c = 0; c < dh; ++c) out[i * w + h * dh + c] += s[j] / z * v[j * w + h * dh + c];
      }
    }
  }
  return out;
}

}  // namespace usmae::testing

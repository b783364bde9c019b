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

#include "usmae/patching/patching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "usmae/error.hpp"

namespace usmae::patching {

bool is_supported_patch_size(std::size_t patch_size) {
  return std::find(kSupportedPatchSizes.begin(), kSupportedPatchSizes.end(),
                   patch_size) != kSupportedPatchSizes.end();
}

PatchGrid patchify(std::span<const float> signal, std::size_t patch_size) {
  if (!is_supported_patch_size(patch_size)) {
    throw InvalidArgument("unsupported patch size " + std::to_string(patch_size) +
                          " (expected 8, 16, 32, 64 or 128)");
  }
  if (signal.empty() || signal.size() % patch_size != 0) {
    throw InvalidArgument("patch size " + std::to_string(patch_size) +
                          " does not divide signal length " +
                          std::to_string(signal.size()));
  }
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.patch_count = signal.size() / patch_size;
  grid.values.assign(signal.begin(), signal.end());
  return grid;
}

std::vector<float> unpatchify(const PatchGrid& grid) { return grid.values; }

std::size_t mask_count(std::size_t patch_count, double ratio) {
  return static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(patch_count) + 0.5));
}

MaskPlan make_plan(std::size_t patch_count, std::vector<std::size_t> masked) {
  std::sort(masked.begin(), masked.end());
  if (masked.empty() || masked.size() >= patch_count) {
    throw InvalidArgument("mask plan must leave at least one masked and one "
                          "visible patch");
  }
  if (std::adjacent_find(masked.begin(), masked.end()) != masked.end() ||
      masked.back() >= patch_count) {
    throw InvalidArgument("mask plan has repeated or out-of-range indices");
  }
  MaskPlan plan;
  plan.patch_count = patch_count;
  plan.ratio = static_cast<double>(masked.size()) / static_cast<double>(patch_count);
  plan.visible.reserve(patch_count - masked.size());
  auto it = masked.begin();
  for (std::size_t i = 0; i < patch_count; ++i) {
    if (it != masked.end() && *it == i) {
      ++it;
    } else {
      plan.visible.push_back(i);
    }
  }
  plan.masked = std::move(masked);
  return plan;
}

MaskPlan sample_mask(std::size_t patch_count, double ratio, Rng& rng) {
  const std::size_t m = mask_count(patch_count, ratio);
  if (!(ratio > 0.0 && ratio < 1.0) || m < 1 || m + 1 > patch_count) {
    throw InvalidArgument("mask ratio " + std::to_string(ratio) + " with " +
                          std::to_string(patch_count) +
                          " patches leaves no masked or no visible patch");
  }
  std::vector<std::size_t> order(patch_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first m slots are a uniform m-subset.
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(
        static_cast<std::int64_t>(i), static_cast<std::int64_t>(patch_count) - 1));
    std::swap(order[i], order[j]);
  }
  order.resize(m);
  MaskPlan plan = make_plan(patch_count, std::move(order));
  plan.ratio = ratio;
  return plan;
}

Partition split_visible(const PatchGrid& grid, const MaskPlan& plan) {
  if (plan.patch_count != grid.patch_count) {
    throw InvalidArgument("mask plan covers " + std::to_string(plan.patch_count) +
                          " patches but the grid has " +
                          std::to_string(grid.patch_count));
  }
  const std::size_t P = grid.patch_size;
  Partition part;
  part.patch_size = P;
  auto take = [&](const std::vector<std::size_t>& idx, std::vector<float>& dst) {
    dst.reserve(idx.size() * P);
    for (std::size_t i : idx) {
      if (i >= grid.patch_count) {
        throw InvalidArgument("patch index " + std::to_string(i) + " out of range");
      }
      const auto row = grid.patch(i);
      dst.insert(dst.end(), row.begin(), row.end());
    }
  };
  take(plan.visible, part.visible);
  take(plan.masked, part.masked);
  part.visible_indices = plan.visible;
  part.masked_indices = plan.masked;
  return part;
}

PatchGrid merge_partition(const Partition& part) {
  const std::size_t P = part.patch_size;
  PatchGrid grid;
  grid.patch_size = P;
  grid.patch_count = part.visible_indices.size() + part.masked_indices.size();
  grid.values.assign(grid.patch_count * P, 0.0f);
  auto put = [&](const std::vector<std::size_t>& idx, const std::vector<float>& src) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] >= grid.patch_count) {
        throw InvalidArgument("patch index " + std::to_string(idx[k]) + " out of range");
      }
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(k * P), P,
                  grid.values.begin() + static_cast<std::ptrdiff_t>(idx[k] * P));
    }
  };
  put(part.visible_indices, part.visible);
  put(part.masked_indices, part.masked);
  return grid;
}

}  // namespace usmae::patching

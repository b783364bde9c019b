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

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "usmae/rng.hpp"

namespace usmae::patching {

inline constexpr std::array<std::size_t, 5> kSupportedPatchSizes{8, 16, 32, 64,
                                                                 128};

bool is_supported_patch_size(std::size_t patch_size);

/// A signal of length L cut into N = L / P non-overlapping rows of P samples.
struct PatchGrid {
  std::size_t patch_size = 0;
  std::size_t patch_count = 0;
  std::vector<float> values;  // N x P, row-major

  std::size_t signal_length() const { return patch_size * patch_count; }
  std::span<const float> patch(std::size_t i) const {
    return std::span<const float>(values).subspan(i * patch_size, patch_size);
  }
};

/// Throws InvalidArgument if P is unsupported or does not divide the length.
PatchGrid patchify(std::span<const float> signal, std::size_t patch_size);

/// Concatenation of the grid rows.
std::vector<float> unpatchify(const PatchGrid& grid);

/// Masked patch indices (sorted) and their sorted complement.
struct MaskPlan {
  std::size_t patch_count = 0;
  double ratio = 0.0;
  std::vector<std::size_t> masked;
  std::vector<std::size_t> visible;
};

/// round(ratio * N) with ties rounded up.
std::size_t mask_count(std::size_t patch_count, double ratio);

/// Uniformly random subset of mask_count(N, ratio) patches. Throws
/// InvalidArgument when the plan would leave no masked or no visible patch.
MaskPlan sample_mask(std::size_t patch_count, double ratio, Rng& rng);

/// Plan for a given masked set (validated and sorted).
MaskPlan make_plan(std::size_t patch_count, std::vector<std::size_t> masked);

struct Partition {
  std::size_t patch_size = 0;
  std::vector<std::size_t> visible_indices;
  std::vector<float> visible;  // |visible| x P
  std::vector<std::size_t> masked_indices;
  std::vector<float> masked;   // |masked| x P
};

/// Order-preserving split of the grid rows into visible inputs and masked
/// targets.
Partition split_visible(const PatchGrid& grid, const MaskPlan& plan);

/// Inverse of split_visible.
PatchGrid merge_partition(const Partition& part);

}  // namespace usmae::patching

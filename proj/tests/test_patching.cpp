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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "usmae/error.hpp"
#include "usmae/patching/patching.hpp"

namespace usmae::patching {
namespace {

std::vector<float> ramp(std::size_t n) {
  std::vector<float> x(n);
  std::iota(x.begin(), x.end(), 0.25f);
  return x;
}

TEST(Patchify, RowsAreContiguousBlocks) {
  const auto x = ramp(512);
  const auto g = patchify(x, 32);
  EXPECT_EQ(g.patch_count, 16u);
  EXPECT_EQ(g.patch(3)[0], x[96]);
  EXPECT_EQ(g.patch(15)[31], x[511]);
  EXPECT_EQ(patchify(x, 8).patch_count, 64u);
}

TEST(Patchify, RoundTripForEverySupportedSize) {
  const auto x = ramp(512);
  for (std::size_t p : kSupportedPatchSizes) EXPECT_EQ(unpatchify(patchify(x, p)), x);
  const auto one = ramp(16);
  EXPECT_EQ(unpatchify(patchify(one, 16)), one);
}

TEST(Patchify, RejectsBadSizes) {
  const auto x = ramp(512);
  EXPECT_THROW(patchify(x, 24), InvalidArgument);
  EXPECT_THROW(patchify(ramp(100), 16), InvalidArgument);
}

TEST(MaskCount, PatchSizeByRatioGrid) {
  // (P, ratio) -> masked / visible for L = 512.
  struct Cell { std::size_t p; double r; std::size_t m, u; };
  const Cell cells[] = {{8, 0.625, 40, 24},  {16, 0.625, 20, 12}, {32, 0.625, 10, 6},
                        {64, 0.625, 5, 3},   {8, 0.75, 48, 16},   {16, 0.75, 24, 8},
                        {32, 0.75, 12, 4},   {64, 0.75, 6, 2},    {8, 0.875, 56, 8},
                        {16, 0.875, 28, 4},  {32, 0.875, 14, 2},  {64, 0.875, 7, 1}};
  for (const auto& c : cells) {
    const std::size_t n = 512 / c.p;
    EXPECT_EQ(mask_count(n, c.r), c.m);
    EXPECT_EQ(n - mask_count(n, c.r), c.u);
  }
}

TEST(MaskCount, RoundsHalfUp) {
  EXPECT_EQ(mask_count(10, 0.25), 3u);   // 2.5
  EXPECT_EQ(mask_count(10, 0.24), 2u);
}

TEST(SampleMask, PlanInvariants) {
  Rng rng(4);
  for (std::size_t n : {2u, 8u, 16u, 64u}) {
    for (double r : {0.3, 0.625, 0.75, 0.875}) {
      if (mask_count(n, r) < 1 || mask_count(n, r) >= n) continue;
      const auto plan = sample_mask(n, r, rng);
      EXPECT_EQ(plan.masked.size(), mask_count(n, r));
      EXPECT_TRUE(std::is_sorted(plan.masked.begin(), plan.masked.end()));
      std::vector<std::size_t> all(plan.masked);
      all.insert(all.end(), plan.visible.begin(), plan.visible.end());
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> expect(n);
      std::iota(expect.begin(), expect.end(), 0u);
      EXPECT_EQ(all, expect);
    }
  }
}

TEST(SampleMask, DegenerateRatiosThrow) {
  Rng rng(1);
  EXPECT_THROW(sample_mask(4, 0.1, rng), InvalidArgument);   // 0 masked
  EXPECT_THROW(sample_mask(4, 0.95, rng), InvalidArgument);  // 0 visible
  EXPECT_THROW(sample_mask(4, 1.0, rng), InvalidArgument);
  EXPECT_THROW(make_plan(4, {1, 1}), InvalidArgument);
  EXPECT_THROW(make_plan(4, {7}), InvalidArgument);
}

TEST(SampleMask, UniformInclusionFrequency) {
  Rng rng(21);
  std::vector<int> hits(16, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    for (std::size_t m : sample_mask(16, 0.75, rng).masked) ++hits[m];
  }
  for (int h : hits) EXPECT_NEAR(double(h) / draws, 0.75, 0.02);
}

TEST(SampleMask, MinimumOneMasked) {
  const auto plan = make_plan(16, {5});
  EXPECT_EQ(plan.visible.size(), 15u);
}

TEST(Partition, SplitAndMergeRoundTrip) {
  const auto x = ramp(512);
  const auto grid = patchify(x, 16);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto plan = sample_mask(32, 0.75, rng);
    const auto part = split_visible(grid, plan);
    EXPECT_EQ(part.visible.size(), 8u * 16u);
    for (std::size_t k = 0; k < plan.masked.size(); ++k) {
      const auto row = grid.patch(plan.masked[k]);
      EXPECT_TRUE(std::equal(row.begin(), row.end(), part.masked.begin() + k * 16));
    }
    EXPECT_EQ(merge_partition(part).values, grid.values);
  }
}

TEST(Partition, PlanMustMatchGrid) {
  const auto grid = patchify(ramp(512), 16);
  EXPECT_THROW(split_visible(grid, make_plan(16, {1, 2})), InvalidArgument);
}

}  // namespace
}  // namespace usmae::patching

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
#include <cstdint>
#include <span>
#include <vector>

namespace usmae::labeling {

/// C(tau) = sum_t r(t) * s(t + tau) for tau in [-(N-1), N-1].
struct CorrelationResult {
  std::vector<int> lags;
  std::vector<double> values;
  /// Lag of the maximum; equal maxima resolve to the smallest lag.
  int tau_max = 0;

  double at(int lag) const { return values[static_cast<std::size_t>(lag - lags.front())]; }
};

/// Direct-sum cross-correlation of two equal-length signals. Terms that fall
/// outside the window count as zero. Throws InvalidArgument on a length
/// mismatch or empty input.
CorrelationResult cross_correlation(std::span<const double> received,
                                    std::span<const double> excitation);

/// Copy of `x` with its mean subtracted.
std::vector<double> remove_mean(std::span<const double> x);

/// Dequantized, mean-removed view of 8-bit samples.
std::vector<double> centered(std::span<const std::uint8_t> samples);

inline constexpr int kMaxClass = 199;

/// Time-of-flight class of `received` given its excitation template (which
/// starts at sample 0). Both inputs are mean-removed before correlation. The
/// label is the delay that best aligns the template, i.e. -tau_max. Throws
/// InvalidArgument if that delay lies outside [0, max_class].
int tof_label(std::span<const double> received,
              std::span<const double> excitation, int max_class = kMaxClass);

int tof_label(std::span<const std::uint8_t> received,
              std::span<const std::uint8_t> excitation,
              int max_class = kMaxClass);

}  // namespace usmae::labeling

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

#include "usmae/labeling/matched_filter.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "usmae/error.hpp"
#include "usmae/signal/synth.hpp"

namespace usmae::labeling {

CorrelationResult cross_correlation(std::span<const double> received,
                                    std::span<const double> excitation) {
  if (received.size() != excitation.size()) {
    throw InvalidArgument("cross_correlation: length mismatch (" +
                          std::to_string(received.size()) + " vs " +
                          std::to_string(excitation.size()) + ")");
  }
  if (received.empty()) throw InvalidArgument("cross_correlation: empty input");
  const int n = static_cast<int>(received.size());
  CorrelationResult out;
  out.lags.resize(static_cast<std::size_t>(2 * n - 1));
  out.values.resize(out.lags.size());
  double best = 0.0;
  for (int tau = -(n - 1); tau <= n - 1; ++tau) {
    const int t0 = std::max(0, -tau);
    const int t1 = std::min(n, n - tau);
    double c = 0.0;
    for (int t = t0; t < t1; ++t) c += received[t] * excitation[t + tau];
    const auto slot = static_cast<std::size_t>(tau + n - 1);
    out.lags[slot] = tau;
    out.values[slot] = c;
    // Strict comparison keeps the first (smallest) lag among equal maxima.
    if (slot == 0 || c > best) {
      best = c;
      out.tau_max = tau;
    }
  }
  return out;
}

std::vector<double> remove_mean(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (out.empty()) return out;
  const double mean =
      std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
  for (double& v : out) v -= mean;
  return out;
}

std::vector<double> centered(std::span<const std::uint8_t> samples) {
  std::vector<double> x(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    x[i] = signal::dequantize_sample(samples[i]);
  }
  return remove_mean(x);
}

int tof_label(std::span<const double> received,
              std::span<const double> excitation, int max_class) {
  const auto r = remove_mean(received);
  const auto s = remove_mean(excitation);
  const CorrelationResult c = cross_correlation(r, s);
  const int label = -c.tau_max;
  if (label < 0 || label > max_class) {
    throw InvalidArgument("matched filter delay " + std::to_string(label) +
                          " outside the class range [0, " +
                          std::to_string(max_class) + "]");
  }
  return label;
}

int tof_label(std::span<const std::uint8_t> received,
              std::span<const std::uint8_t> excitation, int max_class) {
  std::vector<double> r(received.size()), s(excitation.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = signal::dequantize_sample(received[i]);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = signal::dequantize_sample(excitation[i]);
  return tof_label(r, s, max_class);
}

}  // namespace usmae::labeling

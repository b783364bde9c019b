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
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usmae/rng.hpp"

namespace usmae::signal {

enum class Envelope { kHann, kRectangular };

std::string_view to_string(Envelope e);
/// Accepts "hann" or "rectangular"; throws InvalidArgument otherwise.
Envelope parse_envelope(std::string_view name);

/// Peak SNR value meaning "do not add noise".
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Parameters of one tone burst. `onset` is the ToF class label.
struct BurstParams {
  double frequency_hz = 2.0e6;
  double amplitude = 1.0;
  int burst_length = 200;
  int onset = 0;
  double peak_snr_db = kNoNoise;
  Envelope envelope = Envelope::kHann;
};

template <typename T>
struct Interval {
  T min;
  T max;
  bool contains(T v) const { return v >= min && v <= max; }
};

/// Sampling ranges for a synthetic dataset. Defaults are the synthetic
/// column of the reference setup: 1-4 MHz, normalized amplitude 0.2-1,
/// 200-400 sample bursts, 18-38 dB peak SNR, 512 samples at 60 MHz.
struct DatasetSpec {
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  std::size_t signal_length = 512;
  double sample_rate_hz = 60.0e6;
  Interval<double> frequency_hz{1.0e6, 4.0e6};
  Interval<double> amplitude{0.2, 1.0};
  Interval<int> burst_length{200, 400};
  Interval<double> peak_snr_db{18.0, 38.0};
  Interval<int> onset{0, 199};
  Envelope envelope = Envelope::kHann;
  bool noise = true;

  /// Throws InvalidArgument on empty or inverted ranges, a signal length not
  /// divisible by every supported patch size, or non-positive rates.
  void validate() const;

  /// Throws InvalidArgument if `p` lies outside the ranges.
  void check(const BurstParams& p) const;
};

struct SignalRecord {
  std::vector<std::uint8_t> samples;
  int label = 0;
  BurstParams params;
};

struct QuantizeStats {
  std::size_t clipped = 0;
};

/// Noiseless burst: zero before `onset`, then
/// amplitude * envelope(t) * sin(2 pi f (t - onset) / fs) for `burst_length`
/// samples (truncated at the window end), zero after.
std::vector<double> synth_burst(const BurstParams& params,
                                const DatasetSpec& spec);

/// Adds white Gaussian noise with sigma = peak / 10^(snr/20) where peak is
/// max |signal|. `kNoNoise` returns the input unchanged.
std::vector<double> add_noise(std::span<const double> signal,
                              double peak_snr_db, Rng& rng);

/// round((clip(x)+1)/2 * 255), ties away from zero.
std::uint8_t quantize_sample(double x, QuantizeStats* stats = nullptr);
double dequantize_sample(std::uint8_t q);

std::vector<std::uint8_t> quantize_8bit(std::span<const double> signal,
                                        QuantizeStats* stats = nullptr);
std::vector<float> dequantize_8bit(std::span<const std::uint8_t> samples);

/// Uniform independent draw of every burst parameter from the spec ranges.
BurstParams sample_params(const DatasetSpec& spec, Rng& rng);

/// Record `index` of the dataset described by `spec`; depends only on
/// (spec, index).
SignalRecord make_record(const DatasetSpec& spec, std::size_t index,
                         QuantizeStats* stats = nullptr);

/// All `spec.count` records. `threads` > 1 splits the work; output is
/// identical for any thread count.
std::vector<SignalRecord> generate_dataset(const DatasetSpec& spec,
                                           unsigned threads = 1);

/// The noiseless excitation template for `params`: the same burst with onset
/// moved to sample 0.
std::vector<double> excitation_template(const BurstParams& params,
                                        const DatasetSpec& spec);

using Histogram = std::array<std::uint64_t, 256>;

Histogram amplitude_histogram(std::span<const std::uint8_t> samples);
Histogram amplitude_histogram(std::span<const SignalRecord> records);

/// Shannon entropy in bits of a 256-bin histogram; empty bins contribute 0.
/// Throws InvalidArgument if the histogram is empty.
double shannon_entropy(const Histogram& histogram);
double shannon_entropy(std::span<const std::uint8_t> samples);
double shannon_entropy(std::span<const SignalRecord> records);

}  // namespace usmae::signal

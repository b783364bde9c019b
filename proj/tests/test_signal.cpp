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

#include <cmath>
#include <numeric>

#include "usmae/error.hpp"
#include "usmae/signal/synth.hpp"

namespace usmae::signal {
namespace {

BurstParams burst(double f_mhz, int len, int onset, Envelope env = Envelope::kHann) {
  BurstParams p;
  p.frequency_hz = f_mhz * 1e6;
  p.amplitude = 0.8;
  p.burst_length = len;
  p.onset = onset;
  p.envelope = env;
  return p;
}

TEST(Synth, SilentBeforeOnsetAndBounded) {
  DatasetSpec spec;
  const auto p = burst(2.5, 300, 150);
  const auto x = synth_burst(p, spec);
  ASSERT_EQ(x.size(), 512u);
  for (int t = 0; t < 150; ++t) EXPECT_EQ(x[t], 0.0);
  for (double v : x) EXPECT_LE(std::abs(v), p.amplitude);
  EXPECT_NE(x[151], 0.0);
}

TEST(Synth, ZeroAfterBurstEnds) {
  DatasetSpec spec;
  const auto x = synth_burst(burst(2.0, 200, 10), spec);
  for (int t = 210; t < 512; ++t) EXPECT_EQ(x[t], 0.0);
}

TEST(Synth, RectangularPeriodFromSignChanges) {
  // 1.875 MHz at 60 MHz: 32 samples per period, sign changes every 16.
  DatasetSpec spec;
  const auto x = synth_burst(burst(1.875, 400, 0, Envelope::kRectangular), spec);
  // Samples at the zero crossings are ~1e-16; skip them and compare signs of
  // the surrounding samples only.
  std::vector<int> changes;
  int last_sign = 0;
  for (int t = 0; t < 400; ++t) {
    if (std::abs(x[t]) < 1e-9) continue;
    const int s = x[t] < 0 ? -1 : 1;
    if (last_sign != 0 && s != last_sign) changes.push_back(t);
    last_sign = s;
  }
  ASSERT_GT(changes.size(), 10u);
  for (std::size_t i = 1; i < changes.size(); ++i) {
    EXPECT_NEAR(changes[i] - changes[i - 1], 16, 1);
  }
}

TEST(Synth, RejectsOutOfRangeParams) {
  DatasetSpec spec;
  EXPECT_THROW(synth_burst(burst(2.0, 200, 512), spec), InvalidArgument);
  EXPECT_THROW(spec.check(burst(5.0, 200, 0)), InvalidArgument);
  EXPECT_THROW(spec.check(burst(2.0, 200, 200)), InvalidArgument);
}

TEST(Synth, SpecValidation) {
  DatasetSpec spec;
  spec.signal_length = 500;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec = DatasetSpec{};
  spec.frequency_hz = {4e6, 1e6};
  EXPECT_THROW(spec.validate(), InvalidArgument);
}

TEST(Noise, SentinelLeavesSignalUnchanged) {
  Rng rng(1);
  const std::vector<double> x{0.1, -0.5, 0.3};
  EXPECT_EQ(add_noise(x, kNoNoise, rng), x);
}

TEST(Noise, AllZeroSignalIsAnError) {
  Rng rng(1);
  const std::vector<double> x(8, 0.0);
  EXPECT_THROW(add_noise(x, 20.0, rng), NumericError);
}

TEST(Noise, SameSeedSameOutput) {
  const std::vector<double> x{0.1, -0.5, 0.3, 0.9};
  Rng a(5), b(5);
  EXPECT_EQ(add_noise(x, 20.0, a), add_noise(x, 20.0, b));
}

TEST(Noise, EmpiricalPeakSnr) {
  std::vector<double> x(1'000'000, 0.0);
  x[0] = 0.5;  // peak
  Rng rng(9);
  const auto y = add_noise(x, 20.0, rng);
  double ss = 0;
  for (std::size_t i = 1; i < y.size(); ++i) ss += y[i] * y[i];
  const double sigma = std::sqrt(ss / double(y.size() - 1));
  EXPECT_NEAR(20.0 * std::log10(0.5 / sigma), 20.0, 0.1);
}

TEST(Quantize, EndpointsAndMidpoint) {
  EXPECT_EQ(quantize_sample(-1.0), 0);
  EXPECT_EQ(quantize_sample(1.0), 255);
  EXPECT_EQ(quantize_sample(0.0), 128);
  QuantizeStats stats;
  EXPECT_EQ(quantize_sample(1.5, &stats), 255);
  EXPECT_EQ(quantize_sample(-7.0, &stats), 0);
  EXPECT_EQ(stats.clipped, 2u);
  EXPECT_DOUBLE_EQ(dequantize_sample(0), -1.0);
  EXPECT_DOUBLE_EQ(dequantize_sample(255), 1.0);
}

TEST(Quantize, RoundTripWithinOneStep) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    EXPECT_LE(std::abs(dequantize_sample(quantize_sample(x)) - x), 1.0 / 255.0 + 1e-12);
  }
}

TEST(Dataset, DeterministicAndThreadIndependent) {
  DatasetSpec spec;
  spec.count = 300;
  spec.seed = 17;
  const auto a = generate_dataset(spec, 1);
  const auto b = generate_dataset(spec, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].samples, b[i].samples);
    EXPECT_EQ(a[i].label, b[i].label);
  }
  spec.seed = 18;
  EXPECT_NE(generate_dataset(spec)[0].samples, a[0].samples);
}

TEST(Dataset, ParametersWithinTableRanges) {
  DatasetSpec spec;
  spec.count = 2000;
  for (const auto& r : generate_dataset(spec)) {
    EXPECT_EQ(r.label, r.params.onset);
    EXPECT_GE(r.params.frequency_hz, 1.0e6);
    EXPECT_LE(r.params.frequency_hz, 4.0e6);
    EXPECT_GE(r.params.peak_snr_db, 18.0);
    EXPECT_LE(r.params.peak_snr_db, 38.0);
    EXPECT_GE(r.params.burst_length, 200);
    EXPECT_LE(r.params.burst_length, 400);
    EXPECT_GE(r.label, 0);
    EXPECT_LE(r.label, 199);
    EXPECT_EQ(r.samples.size(), 512u);
  }
}

TEST(Dataset, LabelHistogramIsUniform) {
  DatasetSpec spec;
  spec.count = 48000;
  spec.noise = false;  // labels do not depend on noise; keeps the test fast
  std::vector<int> counts(200, 0);
  for (std::size_t i = 0; i < spec.count; ++i) {
    Rng rng = Rng::substream(spec.seed, {i});
    ++counts[sample_params(spec, rng).onset];
  }
  for (int c : counts) {
    EXPECT_GE(c, 240 * 0.6);
    EXPECT_LE(c, 240 * 1.4);
  }
}

TEST(Dataset, NoiselessPreOnsetIsZeroLevel) {
  DatasetSpec spec;
  spec.count = 200;
  spec.noise = false;
  for (const auto& r : generate_dataset(spec)) {
    for (int t = 0; t < r.label; ++t) EXPECT_NEAR(r.samples[t], 128, 1);
  }
}

TEST(Dataset, PreOnsetNoiseMatchesRequestedSnr) {
  DatasetSpec spec;
  spec.count = 400;
  std::size_t checked = 0;
  for (const auto& r : generate_dataset(spec)) {
    if (r.label < 64) continue;
    const auto clean = synth_burst(r.params, spec);
    double peak = 0;
    for (double v : clean) peak = std::max(peak, std::abs(v));
    double mean = 0, ss = 0;
    for (int t = 0; t < r.label; ++t) mean += dequantize_sample(r.samples[t]);
    mean /= r.label;
    for (int t = 0; t < r.label; ++t) {
      const double d = dequantize_sample(r.samples[t]) - mean;
      ss += d * d;
    }
    // Quantization adds a uniform error of variance step^2 / 12.
    const double step = 2.0 / 255.0;
    const double var = std::max(ss / (r.label - 1) - step * step / 12.0, 1e-12);
    const double snr = 20.0 * std::log10(peak / std::sqrt(var));
    // Small noise-only windows estimate sigma with a few percent error.
    const double tol = 1.0 + 3.0 * 8.7 / std::sqrt(2.0 * r.label);
    EXPECT_NEAR(snr, r.params.peak_snr_db, tol) << "record with onset " << r.label;
    ++checked;
  }
  EXPECT_GT(checked, 100u);
}

TEST(Entropy, UniformAndConstant) {
  Histogram uniform;
  uniform.fill(7);
  EXPECT_DOUBLE_EQ(shannon_entropy(uniform), 8.0);
  Histogram constant{};
  constant[42] = 1000;
  EXPECT_DOUBLE_EQ(shannon_entropy(constant), 0.0);
  Histogram empty{};
  EXPECT_THROW(shannon_entropy(empty), InvalidArgument);
}

TEST(Entropy, TwoEqualBinsIsOneBit) {
  const std::vector<std::uint8_t> x{3, 9, 3, 9};
  EXPECT_DOUBLE_EQ(shannon_entropy(std::span<const std::uint8_t>(x)), 1.0);
}

TEST(Envelope, ParseNames) {
  EXPECT_EQ(parse_envelope("hann"), Envelope::kHann);
  EXPECT_EQ(parse_envelope("rectangular"), Envelope::kRectangular);
  EXPECT_THROW(parse_envelope("gauss"), InvalidArgument);
}

}  // namespace
}  // namespace usmae::signal

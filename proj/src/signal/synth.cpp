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

#include "usmae/signal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "usmae/error.hpp"

namespace usmae::signal {

namespace {

constexpr std::size_t kPatchSizes[] = {8, 16, 32, 64, 128};

template <typename T>
void check_interval(const Interval<T>& r, const char* name) {
  if (!(r.min <= r.max)) {
    throw InvalidArgument(std::string("dataset spec: ") + name +
                          " range has min > max");
  }
}

double envelope_at(Envelope e, int t, int length) {
  if (e == Envelope::kRectangular) return 1.0;
  // Hann window stretched over length + 2 points so that the first and last
  // burst samples carry a nonzero weight.
  return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (t + 1) / (length + 1)));
}

}  // namespace

std::string_view to_string(Envelope e) {
  return e == Envelope::kHann ? "hann" : "rectangular";
}

Envelope parse_envelope(std::string_view name) {
  if (name == "hann") return Envelope::kHann;
  if (name == "rectangular" || name == "rect") return Envelope::kRectangular;
  throw InvalidArgument("unknown envelope '" + std::string(name) +
                        "' (expected hann or rectangular)");
}

void DatasetSpec::validate() const {
  if (signal_length == 0 || signal_length > 65535) {
    throw InvalidArgument("dataset spec: signal length must be in [1, 65535]");
  }
  for (std::size_t p : kPatchSizes) {
    if (signal_length % p != 0) {
      throw InvalidArgument("dataset spec: signal length " +
                            std::to_string(signal_length) +
                            " is not divisible by patch size " +
                            std::to_string(p));
    }
  }
  if (!(sample_rate_hz > 0.0)) {
    throw InvalidArgument("dataset spec: sample rate must be positive");
  }
  check_interval(frequency_hz, "frequency");
  check_interval(amplitude, "amplitude");
  check_interval(burst_length, "burst length");
  check_interval(peak_snr_db, "peak SNR");
  check_interval(onset, "onset");
  if (!(frequency_hz.min > 0.0)) {
    throw InvalidArgument("dataset spec: frequency must be positive");
  }
  if (!(amplitude.min > 0.0 && amplitude.max <= 1.0)) {
    throw InvalidArgument("dataset spec: amplitude must lie in (0, 1]");
  }
  if (burst_length.min < 1) {
    throw InvalidArgument("dataset spec: burst length must be at least 1");
  }
  if (onset.min < 0 || static_cast<std::size_t>(onset.max) >= signal_length) {
    throw InvalidArgument("dataset spec: onset range must lie in the window");
  }
  if (noise && !(std::isfinite(peak_snr_db.min) && std::isfinite(peak_snr_db.max))) {
    throw InvalidArgument("dataset spec: peak SNR range must be finite");
  }
}

void DatasetSpec::check(const BurstParams& p) const {
  if (!onset.contains(p.onset) || static_cast<std::size_t>(p.onset) >= signal_length) {
    throw InvalidArgument("burst onset " + std::to_string(p.onset) +
                          " outside the dataset range");
  }
  if (!frequency_hz.contains(p.frequency_hz)) {
    throw InvalidArgument("burst frequency outside the dataset range");
  }
  if (!amplitude.contains(p.amplitude)) {
    throw InvalidArgument("burst amplitude outside the dataset range");
  }
  if (!burst_length.contains(p.burst_length)) {
    throw InvalidArgument("burst length outside the dataset range");
  }
  if (p.peak_snr_db != kNoNoise && !peak_snr_db.contains(p.peak_snr_db)) {
    throw InvalidArgument("burst peak SNR outside the dataset range");
  }
}

std::vector<double> synth_burst(const BurstParams& params,
                                const DatasetSpec& spec) {
  spec.check(params);
  std::vector<double> out(spec.signal_length, 0.0);
  const double w = 2.0 * std::numbers::pi * params.frequency_hz / spec.sample_rate_hz;
  const auto end = std::min<std::size_t>(
      spec.signal_length, static_cast<std::size_t>(params.onset) +
                              static_cast<std::size_t>(params.burst_length));
  for (std::size_t i = static_cast<std::size_t>(params.onset); i < end; ++i) {
    const int t = static_cast<int>(i) - params.onset;
    out[i] = params.amplitude * envelope_at(params.envelope, t, params.burst_length) *
             std::sin(w * t);
  }
  return out;
}

std::vector<double> excitation_template(const BurstParams& params,
                                        const DatasetSpec& spec) {
  BurstParams p = params;
  p.onset = 0;
  p.peak_snr_db = kNoNoise;
  return synth_burst(p, spec);
}

std::vector<double> add_noise(std::span<const double> signal,
                              double peak_snr_db, Rng& rng) {
  std::vector<double> out(signal.begin(), signal.end());
  if (peak_snr_db == kNoNoise) return out;
  if (!std::isfinite(peak_snr_db)) {
    throw InvalidArgument("peak SNR must be finite or the no-noise sentinel");
  }
  double peak = 0.0;
  for (double v : signal) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) {
    throw NumericError("peak SNR is undefined for an all-zero signal");
  }
  const double sigma = peak / std::pow(10.0, peak_snr_db / 20.0);
  for (double& v : out) v += sigma * rng.normal();
  return out;
}

std::uint8_t quantize_sample(double x, QuantizeStats* stats) {
  if (x < -1.0 || x > 1.0) {
    if (stats) ++stats->clipped;
    x = std::clamp(x, -1.0, 1.0);
  }
  const double q = std::round((x + 1.0) / 2.0 * 255.0);
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

double dequantize_sample(std::uint8_t q) { return q / 255.0 * 2.0 - 1.0; }

std::vector<std::uint8_t> quantize_8bit(std::span<const double> signal,
                                        QuantizeStats* stats) {
  std::vector<std::uint8_t> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    out[i] = quantize_sample(signal[i], stats);
  }
  return out;
}

std::vector<float> dequantize_8bit(std::span<const std::uint8_t> samples) {
  std::vector<float> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out[i] = static_cast<float>(dequantize_sample(samples[i]));
  }
  return out;
}

BurstParams sample_params(const DatasetSpec& spec, Rng& rng) {
  BurstParams p;
  p.frequency_hz = rng.uniform(spec.frequency_hz.min, spec.frequency_hz.max);
  p.amplitude = rng.uniform(spec.amplitude.min, spec.amplitude.max);
  p.burst_length = static_cast<int>(
      rng.uniform_int(spec.burst_length.min, spec.burst_length.max));
  p.onset = static_cast<int>(rng.uniform_int(spec.onset.min, spec.onset.max));
  // Drawn even when noise is off so the other parameters do not depend on
  // the noise flag.
  const double snr = rng.uniform(spec.peak_snr_db.min, spec.peak_snr_db.max);
  p.peak_snr_db = spec.noise ? snr : kNoNoise;
  p.envelope = spec.envelope;
  return p;
}

SignalRecord make_record(const DatasetSpec& spec, std::size_t index,
                         QuantizeStats* stats) {
  Rng rng = Rng::substream(spec.seed, {index});
  SignalRecord rec;
  rec.params = sample_params(spec, rng);
  rec.label = rec.params.onset;
  const auto clean = synth_burst(rec.params, spec);
  const auto noisy = add_noise(clean, rec.params.peak_snr_db, rng);
  rec.samples = quantize_8bit(noisy, stats);
  return rec;
}

std::vector<SignalRecord> generate_dataset(const DatasetSpec& spec,
                                           unsigned threads) {
  spec.validate();
  if (spec.count == 0) throw InvalidArgument("dataset spec: count must be positive");
  std::vector<SignalRecord> records(spec.count);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(spec.count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < spec.count; ++i) records[i] = make_record(spec, i);
    return records;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < spec.count; i += threads) {
        records[i] = make_record(spec, i);
      }
    });
  }
  for (auto& t : workers) t.join();
  return records;
}

Histogram amplitude_histogram(std::span<const std::uint8_t> samples) {
  Histogram h{};
  for (std::uint8_t v : samples) ++h[v];
  return h;
}

Histogram amplitude_histogram(std::span<const SignalRecord> records) {
  Histogram h{};
  for (const auto& r : records)
    for (std::uint8_t v : r.samples) ++h[v];
  return h;
}

double shannon_entropy(const Histogram& histogram) {
  std::uint64_t total = 0;
  for (auto c : histogram) total += c;
  if (total == 0) throw InvalidArgument("entropy of an empty dataset");
  double h = 0.0;
  for (auto c : histogram) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double shannon_entropy(std::span<const std::uint8_t> samples) {
  return shannon_entropy(amplitude_histogram(samples));
}

double shannon_entropy(std::span<const SignalRecord> records) {
  return shannon_entropy(amplitude_histogram(records));
}

}  // namespace usmae::signal

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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "usmae/diffcore/tensor.hpp"

namespace usmae::metrics {

/// True when `label` ranks among the k largest entries of `row`. Equal
/// scores rank the lower class index first.
bool in_topk(std::span<const float> row, std::size_t label, std::size_t k);

/// Highest-scoring class of each row; ties go to the lower index.
std::vector<int> argmax_rows(const diff::Tensor& logits);

/// Fraction of rows of `logits` [B, C] whose label is among the k best.
double topk_accuracy(const diff::Tensor& logits, std::span<const int> labels,
                     std::size_t k);

/// Mean |pred - truth| in samples, converted to nanoseconds at `sample_rate_hz`.
double tof_mae_ns(std::span<const int> predicted, std::span<const int> truth,
                  double sample_rate_hz);

struct EvalReport {
  std::size_t count = 0;
  std::size_t k = 5;
  double top1 = 0.0;
  double topk = 0.0;
  double tof_mae_ns = 0.0;
  double loss = 0.0;  // mean cross-entropy, when computed
  std::size_t num_classes = 0;
  std::vector<std::uint32_t> confusion;  // [truth * C + predicted]

  std::uint32_t confusion_at(std::size_t truth, std::size_t predicted) const {
    return confusion[truth * num_classes + predicted];
  }
  std::size_t support(std::size_t truth) const;
};

/// Accuracy, ToF error and confusion counts of one evaluation pass.
EvalReport evaluate(const diff::Tensor& logits, std::span<const int> labels,
                    std::size_t k, double sample_rate_hz);

struct Stat {
  double mean = 0.0;
  std::optional<double> stddev;  // sample std; absent for a single run
};

struct RunSummary {
  std::size_t runs = 0;
  std::size_t k = 5;
  Stat top1;
  Stat topk;
  Stat tof_mae_ns;
};

Stat summarize(std::span<const double> values);
RunSummary aggregate_runs(std::span<const EvalReport> reports);

/// Human-readable tables.
void print_report(std::ostream& os, const EvalReport& report);
void print_summary(std::ostream& os, const RunSummary& summary);

/// CSV with header "metric,value".
void write_report_csv(std::ostream& os, const EvalReport& report);

}  // namespace usmae::metrics

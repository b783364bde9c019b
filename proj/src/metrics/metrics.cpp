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

#include "usmae/metrics/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "usmae/error.hpp"

namespace usmae::metrics {

namespace {

void check_labels(const diff::Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw DimensionError("logits must be [batch, classes]");
  if (labels.size() != logits.rows()) {
    throw DimensionError("got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(logits.rows()) + " logit rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols()) {
      throw InvalidArgument("label " + std::to_string(y) + " outside [0, " +
                            std::to_string(logits.cols()) + ")");
    }
  }
}

}  // namespace

bool in_topk(std::span<const float> row, std::size_t label, std::size_t k) {
  const float s = row[label];
  std::size_t ahead = 0;
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c] > s || (row[c] == s && c < label)) ++ahead;
  }
  return ahead < k;
}

std::vector<int> argmax_rows(const diff::Tensor& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

double topk_accuracy(const diff::Tensor& logits, std::span<const int> labels,
                     std::size_t k) {
  check_labels(logits, labels);
  if (k < 1 || k > logits.cols()) {
    throw InvalidArgument("k must lie in [1, " + std::to_string(logits.cols()) + "]");
  }
  if (labels.empty()) throw InvalidArgument("top-k accuracy of an empty batch");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (in_topk(logits.row(r), static_cast<std::size_t>(labels[r]), k)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double tof_mae_ns(std::span<const int> predicted, std::span<const int> truth,
                  double sample_rate_hz) {
  if (predicted.size() != truth.size()) {
    throw DimensionError("prediction and truth lengths differ");
  }
  if (predicted.empty()) throw InvalidArgument("ToF error of an empty batch");
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be positive");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    total += static_cast<std::uint64_t>(std::abs(predicted[i] - truth[i]));
  }
  const double mean = static_cast<double>(total) / static_cast<double>(truth.size());
  return mean * 1e9 / sample_rate_hz;
}

std::size_t EvalReport::support(std::size_t truth) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < num_classes; ++c) n += confusion_at(truth, c);
  return n;
}

EvalReport evaluate(const diff::Tensor& logits, std::span<const int> labels,
                    std::size_t k, double sample_rate_hz) {
  EvalReport rep;
  rep.count = labels.size();
  rep.k = k;
  rep.num_classes = logits.cols();
  rep.top1 = topk_accuracy(logits, labels, 1);
  rep.topk = topk_accuracy(logits, labels, k);
  const auto pred = argmax_rows(logits);
  rep.tof_mae_ns = tof_mae_ns(pred, labels, sample_rate_hz);
  rep.confusion.assign(rep.num_classes * rep.num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++rep.confusion[static_cast<std::size_t>(labels[i]) * rep.num_classes +
                    static_cast<std::size_t>(pred[i])];
  }
  return rep;
}

Stat summarize(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("no values to summarize");
  Stat s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

RunSummary aggregate_runs(std::span<const EvalReport> reports) {
  if (reports.empty()) throw InvalidArgument("aggregate_runs needs at least one report");
  std::vector<double> top1, topk, tof;
  for (const auto& r : reports) {
    if (r.k != reports[0].k) throw InvalidArgument("reports use different k");
    top1.push_back(r.top1);
    topk.push_back(r.topk);
    tof.push_back(r.tof_mae_ns);
  }
  RunSummary s;
  s.runs = reports.size();
  s.k = reports[0].k;
  s.top1 = summarize(top1);
  s.topk = summarize(topk);
  s.tof_mae_ns = summarize(tof);
  return s;
}

namespace {

std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * v << " %";
  return os.str();
}

std::string with_std(const Stat& s, double scale, const char* unit) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << scale * s.mean;
  if (s.stddev) {
    os << " +- " << scale * *s.stddev;
  } else {
    os << " +- n/a";
  }
  os << unit;
  return os.str();
}

}  // namespace

void print_report(std::ostream& os, const EvalReport& r) {
  os << "examples        " << r.count << "\n"
     << "top-1 accuracy  " << pct(r.top1) << "\n"
     << "top-" << r.k << " accuracy  " << pct(r.topk) << "\n"
     << "ToF MAE         " << std::fixed << std::setprecision(3) << r.tof_mae_ns
     << " ns\n";
  os.unsetf(std::ios::floatfield);
}

void print_summary(std::ostream& os, const RunSummary& s) {
  os << "runs            " << s.runs << "\n"
     << "top-1 accuracy  " << with_std(s.top1, 100.0, " %") << "\n"
     << "top-" << s.k << " accuracy  " << with_std(s.topk, 100.0, " %") << "\n"
     << "ToF MAE         " << with_std(s.tof_mae_ns, 1.0, " ns") << "\n";
}

void write_report_csv(std::ostream& os, const EvalReport& r) {
  os << "metric,value\n"
     << std::setprecision(17)
     << "count," << r.count << "\n"
     << "top1," << r.top1 << "\n"
     << "top" << r.k << "," << r.topk << "\n"
     << "tof_mae_ns," << r.tof_mae_ns << "\n";
}

}  // namespace usmae::metrics

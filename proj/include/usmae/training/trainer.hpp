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
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "usmae/diffcore/param_set.hpp"
#include "usmae/io/formats.hpp"
#include "usmae/metrics/metrics.hpp"
#include "usmae/model/config.hpp"
#include "usmae/signal/synth.hpp"
#include "usmae/training/optim.hpp"

namespace usmae::training {

/// Dequantized signals in [-1, 1], optionally labelled.
struct Dataset {
  std::size_t signal_length = 0;
  double sample_rate_hz = 60.0e6;
  std::vector<std::vector<float>> signals;
  std::vector<int> labels;

  std::size_t size() const { return signals.size(); }
  bool labeled() const { return !labels.empty(); }

  static Dataset from_us1d(const io::Us1dFile& file);
  static Dataset from_records(std::span<const signal::SignalRecord> records,
                              const signal::DatasetSpec& spec);
  /// Records [begin, end).
  Dataset slice(std::size_t begin, std::size_t end) const;
};

enum class Mode { kPretrain, kFinetune, kScratch };

std::string to_string(Mode mode);

struct TrainConfig {
  Mode mode = Mode::kPretrain;
  std::size_t epochs = 200;
  std::size_t batch_size = 1024;
  std::uint64_t seed = 0;
  double base_lr = 1e-3;
  double warmup_fraction = 0.15;
  AdamWConfig adamw;
  double clip_norm = 1.0;  // 0 disables clipping
  std::size_t topk = 5;
  std::size_t eval_batch = 256;
  std::string checkpoint_in;   // pre-trained encoder (finetune mode)
  std::string checkpoint_out;  // final checkpoint
  std::string best_out;        // best-validation checkpoint
  std::string log_out;         // CSV (epoch, split, metric, value)

  /// Throws InvalidArgument on zero epochs or batch size, or bad schedule
  /// and optimizer settings.
  void validate() const;
};

/// Recipe defaults: base LR 1e-3 with 15% warmup for pre-training, 0.05 with
/// 10% warmup for supervised training.
TrainConfig default_train_config(Mode mode);

nlohmann::json to_json(const TrainConfig& config);

struct LogRow {
  std::size_t epoch;
  std::string split;
  std::string metric;
  double value;
};

void write_log_csv(std::ostream& os, const std::vector<LogRow>& rows);

struct EpochSummary {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<metrics::EvalReport> val_report;
  double last_lr = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  model::ModelConfig model;
  diff::ParamSet params;      // after the last epoch
  OptimState optimizer;
  std::vector<EpochSummary> epochs;
  std::vector<LogRow> log;
  std::size_t best_epoch = 0;
  std::optional<metrics::EvalReport> final_report;  // supervised modes with val data
};

using EpochCallback = std::function<void(const EpochSummary&)>;

/// Masked-patch reconstruction training of encoder + decoder.
/// Training masks are redrawn per (seed, epoch, record); validation masks are
/// fixed per (seed, record) so epoch-to-epoch values are comparable.
TrainResult pretrain(const Dataset& train, const Dataset* val,
                     const model::ModelConfig& model, const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

/// Supervised ToF classification. In finetune mode the encoder starts from
/// `init` (all encoder tensors required, everything trainable); scratch mode
/// and a null `init` start from random weights.
TrainResult finetune(const Dataset& train, const Dataset* val,
                     const model::ModelConfig& model, const TrainConfig& config,
                     const diff::ParamSet* init = nullptr,
                     const EpochCallback& on_epoch = {});

/// Mean masked L1 (normalized units) under the fixed validation masks.
double evaluate_reconstruction(diff::ParamSet& params, const model::ModelConfig& model,
                               const Dataset& data, std::uint64_t seed,
                               std::size_t batch_size = 256);

/// Logits [N, num_classes] of every record, computed in batches.
diff::Tensor predict_logits(diff::ParamSet& params, const model::ModelConfig& model,
                            const Dataset& data, std::size_t batch_size = 256);

/// Accuracy, ToF error and mean cross-entropy on a labelled dataset.
metrics::EvalReport evaluate_classifier(diff::ParamSet& params,
                                        const model::ModelConfig& model,
                                        const Dataset& data, std::size_t k,
                                        std::size_t batch_size = 256);

/// One 8-bit quantization step of the [-1, 1] range is 2/255, so a
/// normalized L1 error e corresponds to e * 127.5 amplitude units.
inline constexpr double kAmplitudeUnitsPerNormalized = 127.5;

// --- checkpoints -------------------------------------------------------------

/// Parameters in layout order, then optimizer moments as "opt.m.<name>" and
/// "opt.v.<name>" when `optimizer` is given.
io::Checkpoint make_checkpoint(const model::ModelConfig& model, unsigned parts,
                               const diff::ParamSet& params,
                               const OptimState* optimizer,
                               nlohmann::json extra = nlohmann::json::object());

struct LoadedModel {
  model::ModelConfig config;
  unsigned parts = 0;
  diff::ParamSet params;
  std::optional<OptimState> optimizer;
  nlohmann::json metadata;
};

/// Throws CompatibilityError when the metadata or tensors do not describe a
/// model containing `required_parts`.
LoadedModel load_model(const io::Checkpoint& ckpt, unsigned required_parts);

}  // namespace usmae::training

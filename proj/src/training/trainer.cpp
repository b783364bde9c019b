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

#include "usmae/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "usmae/error.hpp"
#include "usmae/model/mae.hpp"
#include "usmae/patching/patching.hpp"
#include "usmae/rng.hpp"

namespace usmae::training {

namespace {

// Substream tags.
constexpr std::uint64_t kShuffleTag = 0x5348;
constexpr std::uint64_t kTrainMaskTag = 0x4d41;
constexpr std::uint64_t kValMaskTag = 0x5641;
constexpr std::uint64_t kDropoutTag = 0x4450;

using Clock = std::chrono::steady_clock;

void check_dataset(const Dataset& d, const model::ModelConfig& m, const char* what) {
  if (d.size() == 0) throw InvalidArgument(std::string(what) + " dataset is empty");
  if (d.signal_length != m.signal_length) {
    throw InvalidArgument(std::string(what) + " signals have length " +
                          std::to_string(d.signal_length) + ", model expects " +
                          std::to_string(m.signal_length));
  }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::substream(seed, {kShuffleTag, epoch});
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

patching::MaskPlan train_mask(const model::ModelConfig& m, std::uint64_t seed,
                              std::size_t epoch, std::size_t index) {
  Rng rng = Rng::substream(seed, {kTrainMaskTag, epoch, index});
  return patching::sample_mask(m.patch_count(), m.mask_ratio, rng);
}

patching::MaskPlan val_mask(const model::ModelConfig& m, std::uint64_t seed,
                            std::size_t index) {
  Rng rng = Rng::substream(seed, {kValMaskTag, index});
  return patching::sample_mask(m.patch_count(), m.mask_ratio, rng);
}

std::size_t steps_per_epoch(std::size_t n, std::size_t batch) {
  return (n + batch - 1) / batch;
}

void write_log_file(const std::string& path, const std::vector<LogRow>& rows) {
  if (path.empty()) return;
  std::ostringstream os;
  write_log_csv(os, rows);
  const std::string s = os.str();
  io::write_bytes_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()),
                                         s.size()));
}

double cross_entropy_row(std::span<const float> row, int label) {
  double mx = -std::numeric_limits<double>::infinity();
  for (float v : row) mx = std::max(mx, static_cast<double>(v));
  double s = 0.0;
  for (float v : row) s += std::exp(static_cast<double>(v) - mx);
  return mx + std::log(s) - row[static_cast<std::size_t>(label)];
}

// The shared optimization step: clip, schedule, AdamW.
double apply_update(diff::ParamSet& params, OptimState& opt, const TrainConfig& cfg,
                    const Schedule& sched, std::size_t step) {
  if (cfg.clip_norm > 0.0) clip_grad_norm(params, cfg.clip_norm);
  const double lr = lr_at(step + 1, sched);
  adamw_step(params, opt, lr);
  return lr;
}

nlohmann::json report_json(const metrics::EvalReport& r) {
  return {{"count", r.count}, {"k", r.k}, {"top1", r.top1}, {"topk", r.topk},
          {"tof_mae_ns", r.tof_mae_ns}, {"loss", r.loss}};
}

void save(const std::string& path, const model::ModelConfig& m, unsigned parts,
          const diff::ParamSet& params, const OptimState* opt, const TrainConfig& cfg,
          const EpochSummary& ep) {
  if (path.empty()) return;
  nlohmann::json metrics = {{"train_loss", ep.train_loss}};
  if (ep.val_loss) metrics["val_loss"] = *ep.val_loss;
  if (ep.val_report) metrics["val"] = report_json(*ep.val_report);
  nlohmann::json extra = {{"stage", to_string(cfg.mode)},
                          {"train", to_json(cfg)},
                          {"epoch", ep.epoch},
                          {"seed", cfg.seed},
                          {"metrics", metrics}};
  io::write_checkpoint(path, make_checkpoint(m, parts, params, opt, std::move(extra)));
}

}  // namespace

Dataset Dataset::from_us1d(const io::Us1dFile& file) {
  Dataset d;
  d.signal_length = file.signal_length;
  d.sample_rate_hz = file.sample_rate_hz;
  d.signals.reserve(file.count());
  for (const auto& s : file.signals) d.signals.push_back(signal::dequantize_8bit(s));
  if (file.has_labels) d.labels.assign(file.labels.begin(), file.labels.end());
  return d;
}

Dataset Dataset::from_records(std::span<const signal::SignalRecord> records,
                              const signal::DatasetSpec& spec) {
  Dataset d;
  d.signal_length = spec.signal_length;
  d.sample_rate_hz = spec.sample_rate_hz;
  for (const auto& r : records) {
    d.signals.push_back(signal::dequantize_8bit(r.samples));
    d.labels.push_back(r.label);
  }
  return d;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw InvalidArgument("dataset slice out of range");
  Dataset d;
  d.signal_length = signal_length;
  d.sample_rate_hz = sample_rate_hz;
  d.signals.assign(signals.begin() + static_cast<std::ptrdiff_t>(begin),
                   signals.begin() + static_cast<std::ptrdiff_t>(end));
  if (labeled()) {
    d.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                    labels.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return d;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kPretrain: return "pretrain";
    case Mode::kFinetune: return "finetune";
    case Mode::kScratch: return "scratch";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidArgument("epochs must be at least 1");
  if (batch_size == 0) throw InvalidArgument("batch size must be at least 1");
  if (eval_batch == 0) throw InvalidArgument("evaluation batch size must be at least 1");
  if (!(clip_norm >= 0.0)) throw InvalidArgument("clip norm must be non-negative");
  if (topk == 0) throw InvalidArgument("k must be at least 1");
  Schedule{base_lr, warmup_fraction, 1}.validate();
  adamw.validate();
}

TrainConfig default_train_config(Mode mode) {
  TrainConfig c;
  c.mode = mode;
  if (mode != Mode::kPretrain) {
    c.base_lr = 0.05;
    c.warmup_fraction = 0.10;
  }
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"base_lr", c.base_lr},
          {"warmup_fraction", c.warmup_fraction},
          {"beta1", c.adamw.beta1},
          {"beta2", c.adamw.beta2},
          {"adam_eps", c.adamw.eps},
          {"weight_decay", c.adamw.weight_decay},
          {"clip_norm", c.clip_norm},
          {"topk", c.topk}};
}

void write_log_csv(std::ostream& os, const std::vector<LogRow>& rows) {
  os << "epoch,split,metric,value\n" << std::setprecision(9);
  for (const auto& r : rows) {
    os << r.epoch << ',' << r.split << ',' << r.metric << ',' << r.value << '\n';
  }
}

double evaluate_reconstruction(diff::ParamSet& params, const model::ModelConfig& m,
                               const Dataset& data, std::uint64_t seed,
                               std::size_t batch_size) {
  check_dataset(data, m, "validation");
  double total = 0.0;
  for (std::size_t b = 0; b < data.size(); b += batch_size) {
    const std::size_t e = std::min(data.size(), b + batch_size);
    std::vector<patching::MaskPlan> plans;
    for (std::size_t i = b; i < e; ++i) plans.push_back(val_mask(m, seed, i));
    const auto batch = model::make_pretrain_batch<float>(
        std::span(data.signals).subspan(b, e - b), plans, m.patch_size);
    diff::Graph g(&params);
    model::Network<float> net(g, m);
    const float loss = g.value(net.pretrain_loss(batch))[0];
    total += static_cast<double>(loss) * static_cast<double>(e - b);
  }
  return total / static_cast<double>(data.size());
}

diff::Tensor predict_logits(diff::ParamSet& params, const model::ModelConfig& m,
                            const Dataset& data, std::size_t batch_size) {
  check_dataset(data, m, "evaluation");
  diff::Tensor out({data.size(), m.num_classes});
  for (std::size_t b = 0; b < data.size(); b += batch_size) {
    const std::size_t e = std::min(data.size(), b + batch_size);
    const auto logits =
        model::classify_logits(params, m, std::span(data.signals).subspan(b, e - b));
    std::copy(logits.values().begin(), logits.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(b * m.num_classes));
  }
  return out;
}

metrics::EvalReport evaluate_classifier(diff::ParamSet& params, const model::ModelConfig& m,
                                        const Dataset& data, std::size_t k,
                                        std::size_t batch_size) {
  if (!data.labeled()) throw InvalidArgument("evaluation needs a labelled dataset");
  const auto logits = predict_logits(params, m, data, batch_size);
  auto rep = metrics::evaluate(logits, data.labels, k, data.sample_rate_hz);
  double ce = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) ce += cross_entropy_row(logits.row(r), data.labels[r]);
  rep.loss = ce / static_cast<double>(logits.rows());
  return rep;
}

TrainResult pretrain(const Dataset& train, const Dataset* val, const model::ModelConfig& m,
                     const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  m.validate();
  check_dataset(train, m, "training");
  if (val) check_dataset(*val, m, "validation");

  TrainResult res;
  res.model = m;
  if (!cfg.checkpoint_in.empty()) {
    auto loaded = load_model(io::read_checkpoint(cfg.checkpoint_in), model::kPretrainParts);
    if (loaded.config != m) {
      throw CompatibilityError("checkpoint '" + cfg.checkpoint_in +
                               "' was trained with a different model configuration");
    }
    res.params = std::move(loaded.params);
  } else {
    res.params = model::init_params(m, cfg.seed, model::kPretrainParts);
  }
  res.optimizer = make_optim_state(res.params, cfg.adamw);

  const std::size_t spe = steps_per_epoch(train.size(), cfg.batch_size);
  const Schedule sched{cfg.base_lr, cfg.warmup_fraction, cfg.epochs * spe};
  std::size_t step = 0;
  double best = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    const auto order = epoch_order(train.size(), cfg.seed, epoch);
    EpochSummary ep;
    ep.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < spe; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(train.size(), lo + cfg.batch_size);
      std::vector<std::vector<float>> signals;
      std::vector<patching::MaskPlan> plans;
      for (std::size_t i = lo; i < hi; ++i) {
        signals.push_back(train.signals[order[i]]);
        plans.push_back(train_mask(m, cfg.seed, epoch, order[i]));
      }
      const auto batch = model::make_pretrain_batch<float>(signals, plans, m.patch_size);
      res.params.zero_grad();
      diff::Graph g(&res.params);
      Rng drop = Rng::substream(cfg.seed, {kDropoutTag, epoch, b});
      model::Network<float> net(g, m, &drop, true);
      const diff::Var loss = net.pretrain_loss(batch);
      const float lv = g.value(loss)[0];
      if (!std::isfinite(lv)) {
        throw NumericError("non-finite pre-training loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(b));
      }
      g.backward(loss);
      ep.last_lr = apply_update(res.params, res.optimizer, cfg, sched, step++);
      loss_sum += static_cast<double>(lv) * static_cast<double>(hi - lo);
    }
    ep.train_loss = loss_sum / static_cast<double>(train.size());
    res.log.push_back({epoch, "train", "loss", ep.train_loss});
    res.log.push_back({epoch, "train", "mae_amplitude", ep.train_loss * kAmplitudeUnitsPerNormalized});
    res.log.push_back({epoch, "train", "lr", ep.last_lr});
    double score = ep.train_loss;
    if (val) {
      ep.val_loss = evaluate_reconstruction(res.params, m, *val, cfg.seed, cfg.eval_batch);
      res.log.push_back({epoch, "val", "loss", *ep.val_loss});
      res.log.push_back({epoch, "val", "mae_amplitude", *ep.val_loss * kAmplitudeUnitsPerNormalized});
      score = *ep.val_loss;
    }
    ep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (score < best) {
      best = score;
      res.best_epoch = epoch;
      save(cfg.best_out, m, model::kPretrainParts, res.params, nullptr, cfg, ep);
    }
    res.epochs.push_back(ep);
    write_log_file(cfg.log_out, res.log);
    if (on_epoch) on_epoch(ep);
  }
  save(cfg.checkpoint_out, m, model::kPretrainParts, res.params, &res.optimizer, cfg,
       res.epochs.back());
  return res;
}

TrainResult finetune(const Dataset& train, const Dataset* val, const model::ModelConfig& m,
                     const TrainConfig& cfg, const diff::ParamSet* init,
                     const EpochCallback& on_epoch) {
  cfg.validate();
  m.validate();
  check_dataset(train, m, "training");
  if (!train.labeled()) throw InvalidArgument("fine-tuning needs a labelled dataset");
  if (val) {
    check_dataset(*val, m, "validation");
    if (!val->labeled()) throw InvalidArgument("validation dataset has no labels");
  }
  if (cfg.topk > m.num_classes) throw InvalidArgument("k exceeds the class count");

  TrainResult res;
  res.model = m;
  res.params = model::init_params(m, cfg.seed, model::kFinetuneParts);
  std::optional<LoadedModel> loaded;
  if (cfg.mode == Mode::kFinetune && init == nullptr && !cfg.checkpoint_in.empty()) {
    loaded = load_model(io::read_checkpoint(cfg.checkpoint_in), model::kEncoder);
    init = &loaded->params;
  }
  if (cfg.mode == Mode::kFinetune && init != nullptr) {
    for (auto& e : res.params) {
      if (!model::is_encoder_param(e.name)) continue;
      const auto idx = init->find(e.name);
      if (!idx) throw CompatibilityError("initial weights lack '" + e.name + "'");
      const auto& src = (*init)[*idx].value;
      if (src.shape() != e.value.shape()) {
        throw CompatibilityError("initial weights for '" + e.name + "' have shape " +
                                 diff::shape_string(src.shape()) + ", model needs " +
                                 diff::shape_string(e.value.shape()));
      }
      e.value = src;
    }
  }
  res.optimizer = make_optim_state(res.params, cfg.adamw);

  const std::size_t spe = steps_per_epoch(train.size(), cfg.batch_size);
  const Schedule sched{cfg.base_lr, cfg.warmup_fraction, cfg.epochs * spe};
  std::size_t step = 0;
  // Best by validation top-1, ties broken by lower loss.
  std::pair<double, double> best{-1.0, 0.0};

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    const auto order = epoch_order(train.size(), cfg.seed, epoch);
    EpochSummary ep;
    ep.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < spe; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(train.size(), lo + cfg.batch_size);
      std::vector<std::vector<float>> signals;
      std::vector<int> labels;
      for (std::size_t i = lo; i < hi; ++i) {
        signals.push_back(train.signals[order[i]]);
        labels.push_back(train.labels[order[i]]);
      }
      const auto batch = model::make_classify_batch<float>(signals, labels, m.patch_size);
      res.params.zero_grad();
      diff::Graph g(&res.params);
      Rng drop = Rng::substream(cfg.seed, {kDropoutTag, epoch, b});
      model::Network<float> net(g, m, &drop, true);
      diff::Var logits;
      const diff::Var loss = net.classify_loss(batch, &logits);
      const float lv = g.value(loss)[0];
      if (!std::isfinite(lv)) {
        throw NumericError("non-finite classification loss at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      const auto pred = metrics::argmax_rows(g.value(logits));
      for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i];
      g.backward(loss);
      ep.last_lr = apply_update(res.params, res.optimizer, cfg, sched, step++);
      loss_sum += static_cast<double>(lv) * static_cast<double>(hi - lo);
    }
    ep.train_loss = loss_sum / static_cast<double>(train.size());
    res.log.push_back({epoch, "train", "loss", ep.train_loss});
    res.log.push_back({epoch, "train", "top1",
                       static_cast<double>(hits) / static_cast<double>(train.size())});
    res.log.push_back({epoch, "train", "lr", ep.last_lr});
    std::pair<double, double> score{0.0, -ep.train_loss};
    if (val) {
      ep.val_report = evaluate_classifier(res.params, m, *val, cfg.topk, cfg.eval_batch);
      ep.val_loss = ep.val_report->loss;
      res.log.push_back({epoch, "val", "loss", ep.val_report->loss});
      res.log.push_back({epoch, "val", "top1", ep.val_report->top1});
      res.log.push_back({epoch, "val", "top" + std::to_string(cfg.topk), ep.val_report->topk});
      res.log.push_back({epoch, "val", "tof_mae_ns", ep.val_report->tof_mae_ns});
      score = {ep.val_report->top1, -ep.val_report->loss};
    }
    ep.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (epoch == 0 || score > best) {
      best = score;
      res.best_epoch = epoch;
      save(cfg.best_out, m, model::kFinetuneParts, res.params, nullptr, cfg, ep);
    }
    res.epochs.push_back(ep);
    write_log_file(cfg.log_out, res.log);
    if (on_epoch) on_epoch(ep);
  }
  if (val) res.final_report = res.epochs.back().val_report;
  save(cfg.checkpoint_out, m, model::kFinetuneParts, res.params, &res.optimizer, cfg,
       res.epochs.back());
  return res;
}

io::Checkpoint make_checkpoint(const model::ModelConfig& m, unsigned parts,
                               const diff::ParamSet& params, const OptimState* opt,
                               nlohmann::json extra) {
  model::check_params(m, params, parts);
  io::Checkpoint c;
  c.metadata = std::move(extra);
  c.metadata["format"] = "usmae";
  c.metadata["model"] = m;
  c.metadata["parts"] = parts;
  for (const auto& e : params) c.tensors.emplace_back(e.name, e.value);
  if (opt) {
    check_optim_state(params, *opt);
    c.metadata["optimizer"] = {{"step", opt->step},
                               {"beta1", opt->hp.beta1},
                               {"beta2", opt->hp.beta2},
                               {"eps", opt->hp.eps},
                               {"weight_decay", opt->hp.weight_decay}};
    for (std::size_t i = 0; i < params.size(); ++i) {
      c.tensors.emplace_back("opt.m." + params[i].name, opt->m[i]);
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      c.tensors.emplace_back("opt.v." + params[i].name, opt->v[i]);
    }
  }
  return c;
}

LoadedModel load_model(const io::Checkpoint& ckpt, unsigned required_parts) {
  LoadedModel out;
  out.metadata = ckpt.metadata;
  try {
    out.config = ckpt.metadata.at("model").get<model::ModelConfig>();
    out.parts = ckpt.metadata.at("parts").get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw CompatibilityError(std::string("checkpoint metadata lacks a model description: ") +
                             e.what());
  }
  try {
    out.config.validate();
  } catch (const InvalidArgument& e) {
    throw CompatibilityError(std::string("checkpoint model is invalid: ") + e.what());
  }
  if ((out.parts & required_parts) != required_parts) {
    const bool want_cls = (required_parts & model::kClassifier) != 0;
    const bool want_dec = (required_parts & model::kDecoder) != 0;
    throw CompatibilityError(std::string("checkpoint has no ") +
                             (want_cls ? "classification head"
                              : want_dec ? "decoder"
                                         : "encoder") +
                             " (stored parts " + std::to_string(out.parts) + ")");
  }
  // Every stored part must be complete, even the ones not requested.
  const auto wanted = model::param_layout(out.config, required_parts);
  for (const auto& spec : model::param_layout(out.config, out.parts)) {
    const diff::Tensor* t = ckpt.find(spec.name);
    if (t == nullptr) throw CompatibilityError("checkpoint lacks tensor '" + spec.name + "'");
    if (t->shape() != spec.shape) {
      throw CompatibilityError("checkpoint tensor '" + spec.name + "' has shape " +
                               diff::shape_string(t->shape()) + ", expected " +
                               diff::shape_string(spec.shape));
    }
  }
  for (const auto& spec : wanted) out.params.add(spec.name, *ckpt.find(spec.name));
  if (ckpt.metadata.contains("optimizer") && required_parts == out.parts) {
    const auto& o = ckpt.metadata["optimizer"];
    OptimState s;
    s.hp = {o.at("beta1").get<double>(), o.at("beta2").get<double>(),
            o.at("eps").get<double>(), o.at("weight_decay").get<double>()};
    s.step = o.at("step").get<std::uint64_t>();
    for (const auto& e : out.params) {
      const diff::Tensor* m = ckpt.find("opt.m." + e.name);
      const diff::Tensor* v = ckpt.find("opt.v." + e.name);
      if (!m || !v) throw CompatibilityError("checkpoint lacks moments of '" + e.name + "'");
      s.m.push_back(*m);
      s.v.push_back(*v);
    }
    check_optim_state(out.params, s);
    out.optimizer = std::move(s);
  }
  return out;
}

}  // namespace usmae::training

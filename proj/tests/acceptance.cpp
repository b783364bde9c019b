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

// Acceptance checks. Each criterion prints one line:
//   PASS|FAIL criterion N (title): measured values
// Run all with no arguments, or one with --criterion N.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "usmae/diffcore/grad_check.hpp"
#include "usmae/io/formats.hpp"
#include "usmae/labeling/matched_filter.hpp"
#include "usmae/metrics/metrics.hpp"
#include "usmae/model/mae.hpp"
#include "usmae/patching/patching.hpp"
#include "usmae/signal/synth.hpp"
#include "usmae/training/trainer.hpp"

namespace {

using namespace usmae;
using diff::GraphD;
using diff::ParamSetD;
using diff::TensorD;
using diff::Var;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

template <typename T = double>
diff::BasicTensor<T> randn(diff::Shape shape, std::uint64_t seed, double scale = 1.0) {
  diff::BasicTensor<T> t(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.values()) v = static_cast<T>(scale * rng.normal());
  return t;
}

std::vector<float> uniform_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> x(n);
  for (auto& v : x) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return x;
}

// --- 1 ----------------------------------------------------------------------

void mask_bookkeeping(Outcome& o) {
  struct Cell { std::size_t p; double r; std::size_t m, u; };
  const Cell cells[] = {{8, 0.625, 40, 24},  {16, 0.625, 20, 12}, {32, 0.625, 10, 6},
                        {64, 0.625, 5, 3},   {8, 0.75, 48, 16},   {16, 0.75, 24, 8},
                        {32, 0.75, 12, 4},   {64, 0.75, 6, 2},    {8, 0.875, 56, 8},
                        {16, 0.875, 28, 4},  {32, 0.875, 14, 2},  {64, 0.875, 7, 1}};
  Rng rng(1);
  int exact = 0;
  for (const auto& c : cells) {
    const std::size_t n = 512 / c.p;
    const auto plan = patching::sample_mask(n, c.r, rng);
    const bool ok = patching::mask_count(n, c.r) == c.m && plan.masked.size() == c.m &&
                    plan.visible.size() == c.u;
    exact += ok;
    o.require(ok, "P=" + std::to_string(c.p) + " r=" + std::to_string(c.r));
  }
  o.detail << exact << "/12 cells exact";
}

// --- 2 ----------------------------------------------------------------------

void parameter_counts(Outcome& o) {
  const std::pair<const char*, double> rows[] = {
      {"T", 17e3},       {"S", 100e3},     {"M", 795e3},    {"L", 2.7e6},
      {"M-dh32", 795e3}, {"M-dh64", 1.2e6}, {"M-dh128", 2e6}};
  for (const auto& [name, published] : rows) {
    const auto c = model::preset(name);
    const std::size_t got = model::param_count(c).encoder_blocks;
    const std::size_t oracle =
        c.layers_enc * testing::block_params(c.d_model_enc, c.attn_width_enc());
    const double rel = std::abs(static_cast<double>(got) - published) / published;
    o.require(got == oracle, std::string(name) + " differs from per-layer derivation");
    o.require(rel <= 0.02, std::string(name) + " outside 2%");
    o.detail << name << "=" << got << " (" << std::fixed << std::setprecision(2)
             << 100.0 * rel << "%) ";
  }
}

// --- 3 ----------------------------------------------------------------------

double project(GraphD& g, Var y, std::uint64_t seed, Var* out) {
  const std::size_t rows = g.value(y).rows(), cols = g.value(y).cols();
  const Var l = g.constant(randn({1, rows}, seed));
  const Var r = g.constant(randn({cols, 1}, seed + 1));
  *out = g.sum(g.matmul(l, g.matmul(y, r)));
  return 0.0;
}

Var projected(GraphD& g, Var y, std::uint64_t seed) {
  Var out;
  project(g, y, seed, &out);
  return out;
}

void gradient_correctness(Outcome& o) {
  struct Case {
    std::string name;
    std::function<void(ParamSetD&)> setup;
    diff::LossFn<double> loss;
  };
  TensorD l1_target = randn({4, 3}, 16);
  for (auto& v : l1_target.values()) v += (v > 0 ? 5.0 : -5.0);
  std::vector<Case> cases = {
      {"matmul", [](ParamSetD& p) { p.add("a", randn({4, 3}, 1)); p.add("b", randn({3, 5}, 2)); },
       [](GraphD& g) { return projected(g, g.matmul(g.param("a"), g.param("b")), 9); }},
      {"linear+add+scale",
       [](ParamSetD& p) {
         p.add("x", randn({4, 3}, 1)); p.add("w", randn({3, 2}, 2));
         p.add("b", randn({2}, 3)); p.add("y", randn({4, 2}, 4));
       },
       [](GraphD& g) {
         const Var lin = g.linear(g.param("x"), g.param("w"), g.param("b"));
         return projected(g, g.add(g.scale(lin, -1.7), g.param("y")), 10);
       }},
      {"gelu", [](ParamSetD& p) { p.add("x", randn({3, 4}, 5, 2.0)); },
       [](GraphD& g) { return projected(g, g.gelu(g.param("x")), 11); }},
      {"softmax", [](ParamSetD& p) { p.add("x", randn({3, 4}, 6)); },
       [](GraphD& g) {
         return g.add(projected(g, g.softmax(g.param("x"), 1), 12),
                      projected(g, g.softmax(g.param("x"), 0), 13));
       }},
      {"layer_norm",
       [](ParamSetD& p) { p.add("x", randn({3, 6}, 7)); p.add("g", randn({6}, 8)); p.add("b", randn({6}, 9)); },
       [](GraphD& g) {
         return projected(g, g.layer_norm(g.param("x"), g.param("g"), g.param("b")), 14);
       }},
      {"attention",
       [](ParamSetD& p) { p.add("q", randn({6, 4}, 10)); p.add("k", randn({6, 4}, 11)); p.add("v", randn({6, 4}, 12)); },
       [](GraphD& g) {
         return projected(g, g.attention(g.param("q"), g.param("k"), g.param("v"), 2, 2), 15);
       }},
      {"gather/scatter/mean_rows",
       [](ParamSetD& p) { p.add("t", randn({4, 3}, 13)); p.add("fill", randn({3}, 14)); },
       [](GraphD& g) {
         const std::vector<std::size_t> idx{3, 1, 1}, pos{4, 0, 2};
         const Var full = g.scatter_rows(g.gather_rows(g.param("t"), idx), pos, g.param("fill"), 6);
         return projected(g, g.mean_rows(full, 2), 16);
       }},
      {"masked_l1", [](ParamSetD& p) { p.add("p", randn({4, 3}, 15)); },
       [&l1_target](GraphD& g) {
         const std::vector<std::uint8_t> mask{1, 0, 1, 1};
         return g.masked_l1(g.param("p"), l1_target, mask);
       }},
      {"cross_entropy", [](ParamSetD& p) { p.add("z", randn({3, 7}, 17)); },
       [](GraphD& g) {
         const std::vector<int> labels{0, 6, 3};
         return g.cross_entropy(g.param("z"), labels);
       }},
      {"dropout", [](ParamSetD& p) { p.add("x", randn({5, 5}, 18)); },
       [](GraphD& g) {
         Rng rng(3);
         return projected(g, g.dropout(g.param("x"), 0.3, rng, true), 17);
       }},
  };
  double worst_primitive = 0.0;
  for (auto& c : cases) {
    ParamSetD ps;
    c.setup(ps);
    const auto r = diff::grad_check<double>(c.loss, ps);
    worst_primitive = std::max(worst_primitive, r.max_rel_error);
    o.require(r.max_rel_error <= 1e-3, c.name);
  }
  o.detail << std::scientific << std::setprecision(2) << "primitives " << worst_primitive;

  // One full encoder block of preset T with randomized weights.
  {
    const auto cfg = model::preset("T");
    auto ps = model::init_params(cfg, 5, model::kEncoder).cast<double>();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps[i].name.starts_with("enc.blocks.0.") && ps[i].name.find(".w") != std::string::npos) {
        ps[i].value = randn(ps[i].value.shape(), 100 + i, 0.3);
      }
    }
    const auto x = randn({64, 32}, 6);
    const auto r = diff::grad_check<double>(
        [&](GraphD& g) {
          model::Network<double> net(g, cfg);
          return projected(g, net.block(g.constant(x), "enc.blocks.0.", 2, cfg.heads_enc), 7);
        },
        ps);
    o.require(r.max_rel_error <= 1e-3, "encoder block");
    o.detail << ", encoder block " << r.max_rel_error;
  }

  // End-to-end masked L1 of preset T on L = 64 signals, every parameter element.
  {
    auto cfg = model::preset("T");
    cfg.signal_length = 64;
    cfg.dropout = 0.0;
    auto ps = model::init_params(cfg, 6, model::kPretrainParts).cast<double>();
    std::vector<std::vector<float>> xs{uniform_signal(64, 1), uniform_signal(64, 2)};
    for (auto& x : xs)
      for (auto& v : x) v += 4.0f;  // residuals stay clear of the |.| kink
    const std::vector<patching::MaskPlan> plans{patching::make_plan(4, {0, 1, 3}),
                                                patching::make_plan(4, {1, 2, 3})};
    const auto batch = model::make_pretrain_batch<double>(xs, plans, 16);
    const diff::LossFn<double> loss = [&](GraphD& g) {
      model::Network<double> net(g, cfg);
      return net.pretrain_loss(batch);
    };
    const auto r = diff::grad_check<double>(loss, ps);
    o.require(r.max_rel_error <= 1e-3, "end-to-end");
    o.detail << ", end-to-end T/L=64 " << r.max_rel_error << " over " << r.checked
             << " elements (worst " << r.worst_param << "[" << r.worst_index << "] "
             << r.worst_analytic << " vs " << r.worst_numeric << ")";
    if (r.max_rel_error > 1e-3) {
      // Informational only: a smaller step separates truncation error from a bad gradient.
      diff::GradCheckOptions fine;
      fine.eps = 1e-4;
      o.detail << "; eps=1e-4 gives " << diff::grad_check<double>(loss, ps, fine).max_rel_error;
    }
  }
}

// --- 4 ----------------------------------------------------------------------

void labeler(Outcome& o) {
  signal::DatasetSpec spec;
  spec.noise = false;
  int cases = 0, exact = 0;
  for (double f = 1.0e6; f <= 4.0e6 + 1; f += 0.5e6) {
    for (int len = 200; len <= 400; len += 50) {
      for (int onset = 0; onset <= 199; onset += 13) {
        signal::BurstParams p;
        p.frequency_hz = f;
        p.burst_length = len;
        p.onset = onset;
        p.amplitude = 0.2 + 0.8 * ((cases * 7) % 11) / 10.0;
        p.peak_snr_db = signal::kNoNoise;
        const auto rx = signal::quantize_8bit(signal::synth_burst(p, spec));
        const auto tx = signal::quantize_8bit(signal::excitation_template(p, spec));
        exact += labeling::tof_label(rx, tx) == onset;
        ++cases;
      }
    }
  }
  o.require(cases >= 500 && exact == cases, "noiseless grid");
  o.detail << "noiseless " << exact << "/" << cases << " exact";

  Rng rng(2024);
  int within = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    auto p = signal::sample_params(spec, rng);
    p.peak_snr_db = 20.0;
    Rng noise = Rng::substream(7, {static_cast<std::uint64_t>(i)});
    const auto rx = signal::quantize_8bit(
        signal::add_noise(signal::synth_burst(p, spec), 20.0, noise));
    const auto tx = signal::quantize_8bit(signal::excitation_template(p, spec));
    int label = -1000;
    try {
      label = labeling::tof_label(rx, tx);
    } catch (const InvalidArgument&) {
    }
    within += std::abs(label - p.onset) <= 1;
  }
  const double frac = static_cast<double>(within) / trials;
  o.require(frac >= 0.99, "20 dB trials");
  o.detail << ", 20 dB: " << within << "/" << trials << " within +-1 sample";
}

// --- shared data for 5-7 ------------------------------------------------------

training::Dataset synthetic(std::size_t count, std::uint64_t seed) {
  signal::DatasetSpec spec;
  spec.count = count;
  spec.seed = seed;
  return training::Dataset::from_records(signal::generate_dataset(spec), spec);
}

// --- 5 ----------------------------------------------------------------------

void pretraining_learns(Outcome& o) {
  const auto train = synthetic(8000, 501);
  const auto val = synthetic(1000, 502);
  auto cfg = training::default_train_config(training::Mode::kPretrain);
  cfg.epochs = 30;
  cfg.batch_size = 256;
  cfg.seed = 5;
  std::vector<double> curve;
  training::pretrain(train, &val, model::preset("S"), cfg,
                     [&](const training::EpochSummary& e) {
                       curve.push_back(*e.val_loss * training::kAmplitudeUnitsPerNormalized);
                     });
  std::size_t down = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) down += curve[i] <= curve[i - 1];
  const double frac = static_cast<double>(down) / static_cast<double>(curve.size() - 1);
  const double ratio = curve.back() / curve.front();
  o.require(ratio < 0.5, "final < 0.5 x first");
  o.require(frac >= 0.8, "non-increasing in >= 80% of epochs");
  o.detail << std::fixed << std::setprecision(2) << "val MAE " << curve.front() << " -> "
           << curve.back() << " LSB (ratio " << std::setprecision(3) << ratio
           << "), non-increasing " << down << "/" << curve.size() - 1;
}

// --- 6 and 7 ------------------------------------------------------------------

struct Downstream {
  double top1 = 0, top5 = 0;
};

// Desk-scale protocol shared by criteria 6 and 7: 4K labelled training
// signals (also the pre-training set), 1K validation signals, preset S.
constexpr std::size_t kPretrainEpochs = 60;
constexpr std::size_t kPretrainBatch = 64;
constexpr std::size_t kFinetuneEpochs = 30;
constexpr std::size_t kFinetuneBatch = 32;
constexpr double kFinetuneLr = 1e-3;

diff::ParamSet pretrained_encoder(const training::Dataset& train, const model::ModelConfig& m,
                                  std::uint64_t seed) {
  auto cfg = training::default_train_config(training::Mode::kPretrain);
  cfg.epochs = kPretrainEpochs;
  cfg.batch_size = kPretrainBatch;
  cfg.seed = seed;
  return training::pretrain(train, nullptr, m, cfg).params;
}

Downstream downstream(const training::Dataset& train, const training::Dataset& val,
                      const model::ModelConfig& m, training::Mode mode, std::uint64_t seed,
                      const diff::ParamSet* init) {
  auto cfg = training::default_train_config(mode);
  cfg.epochs = kFinetuneEpochs;
  cfg.batch_size = kFinetuneBatch;
  cfg.base_lr = kFinetuneLr;
  cfg.seed = seed;
  const auto r = training::finetune(train, &val, m, cfg, init);
  return {r.final_report->top1, r.final_report->topk};
}

void pretraining_beats_scratch(Outcome& o) {
  const auto train = synthetic(4000, 601);
  const auto val = synthetic(1000, 602);
  const auto m = model::preset("S");
  Downstream fine, scratch;
  o.detail << std::fixed << std::setprecision(1);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto enc = pretrained_encoder(train, m, seed);
    const auto f = downstream(train, val, m, training::Mode::kFinetune, seed, &enc);
    const auto s = downstream(train, val, m, training::Mode::kScratch, seed, nullptr);
    fine.top1 += f.top1 / 3;
    fine.top5 += f.top5 / 3;
    scratch.top1 += s.top1 / 3;
    scratch.top5 += s.top5 / 3;
    o.detail << "seed " << seed << " ft/scratch top1 " << 100 * f.top1 << "/" << 100 * s.top1
             << "; ";
  }
  o.require(fine.top1 - scratch.top1 >= 0.05, "top-1 gap >= 5 points");
  o.require(fine.top5 > scratch.top5, "top-5 ordering");
  o.detail << "mean top1 " << 100 * fine.top1 << " vs " << 100 * scratch.top1 << ", top5 "
           << 100 * fine.top5 << " vs " << 100 * scratch.top5;
}

void patch_size_direction(Outcome& o) {
  const auto train = synthetic(4000, 601);
  const auto val = synthetic(1000, 602);
  double mean32 = 0, mean8 = 0;
  o.detail << std::fixed << std::setprecision(1);
  for (std::uint64_t seed : {1, 2, 3}) {
    for (std::size_t p : {32u, 8u}) {
      auto m = model::preset("S");
      m.patch_size = p;
      m.mask_ratio = 0.75;
      const auto enc = pretrained_encoder(train, m, seed);
      const double top1 =
          downstream(train, val, m, training::Mode::kFinetune, seed, &enc).top1;
      (p == 32 ? mean32 : mean8) += top1 / 3;
      o.detail << "seed " << seed << " P=" << p << " " << 100 * top1 << "; ";
    }
  }
  o.require(mean32 > mean8, "P=32 above P=8");
  o.detail << "mean top1 P=32 " << 100 * mean32 << " vs P=8 " << 100 * mean8;
}

// --- 8 ----------------------------------------------------------------------

void entropy(Outcome& o) {
  std::vector<std::uint8_t> uniform(256 * 40);
  for (std::size_t i = 0; i < uniform.size(); ++i) uniform[i] = static_cast<std::uint8_t>(i);
  const std::vector<std::uint8_t> constant(5000, 77);
  const double hu = signal::shannon_entropy(uniform);
  const double hc = signal::shannon_entropy(constant);
  o.require(hu == 8.0, "uniform exactly 8");
  o.require(hc == 0.0, "constant exactly 0");
  signal::DatasetSpec spec;
  spec.count = 10000;
  spec.seed = 801;
  const double hd = signal::shannon_entropy(signal::generate_dataset(spec));
  o.require(hd >= 4.0 && hd <= 5.5, "dataset within [4.0, 5.5]");
  o.detail << std::fixed << std::setprecision(4) << "uniform " << hu << ", constant " << hc
           << ", 10K-signal dataset " << hd << " bits";
}

// --- 9 ----------------------------------------------------------------------

io::Us1dFile to_us1d(const std::vector<signal::SignalRecord>& recs) {
  io::Us1dFile f;
  f.has_labels = true;
  for (const auto& r : recs) {
    f.signals.push_back(r.samples);
    f.labels.push_back(static_cast<std::uint16_t>(r.label));
  }
  return f;
}

void determinism(Outcome& o) {
  signal::DatasetSpec spec;
  spec.count = 600;
  spec.seed = 901;
  const auto a = io::encode_us1d(to_us1d(signal::generate_dataset(spec, 1)));
  const auto b = io::encode_us1d(to_us1d(signal::generate_dataset(spec, 1)));
  const auto c = io::encode_us1d(to_us1d(signal::generate_dataset(spec, 4)));
  o.require(a == b && a == c, "dataset bytes");
  o.require(io::encode_us1d(io::decode_us1d(a)) == a, "US1D round trip");

  const auto data = training::Dataset::from_us1d(io::decode_us1d(a));
  const auto m = model::preset("T");
  auto cfg = training::default_train_config(training::Mode::kPretrain);
  cfg.epochs = 1;
  cfg.batch_size = 64;
  cfg.seed = 9;
  const double l1 = training::pretrain(data, nullptr, m, cfg).epochs[0].train_loss;
  const double l2 = training::pretrain(data, nullptr, m, cfg).epochs[0].train_loss;
  o.require(std::memcmp(&l1, &l2, sizeof l1) == 0, "epoch-0 loss bits");

  auto fcfg = training::default_train_config(training::Mode::kScratch);
  fcfg.epochs = 1;
  fcfg.batch_size = 64;
  fcfg.base_lr = 1e-3;
  auto fr = training::finetune(data, nullptr, m, fcfg);
  const auto ck = training::make_checkpoint(m, model::kFinetuneParts, fr.params, &fr.optimizer);
  const auto bytes = io::encode_checkpoint(ck);
  const auto back = io::decode_checkpoint(bytes);
  o.require(io::encode_checkpoint(back) == bytes, "checkpoint round trip");
  auto loaded = training::load_model(back, model::kFinetuneParts);
  const auto logits_a = training::predict_logits(fr.params, m, data);
  const auto logits_b = training::predict_logits(loaded.params, loaded.config, data);
  o.require(std::memcmp(logits_a.data(), logits_b.data(), logits_a.size() * sizeof(float)) == 0,
            "reloaded logits");
  o.detail << "dataset " << a.size() << " bytes identical (1 and 4 threads), epoch-0 loss "
           << std::setprecision(17) << l1 << " twice, checkpoint " << bytes.size()
           << " bytes round trip, logits bitwise equal";
}

// --- 10 ---------------------------------------------------------------------

void metric_oracles(Outcome& o) {
  Rng rng(1001);
  const std::size_t rows = 100000, classes = 200;
  std::size_t mismatches = 0;
  std::vector<float> row(classes);
  for (std::size_t r = 0; r < rows; ++r) {
    // Coarse levels make ties frequent.
    for (auto& v : row) v = static_cast<float>(rng.uniform_int(0, 63));
    const int label = static_cast<int>(rng.uniform_int(0, classes - 1));
    for (std::size_t k : {1u, 2u, 5u}) {
      mismatches += metrics::in_topk(row, label, k) != testing::topk_by_sort(row, label, k);
    }
  }
  o.require(mismatches == 0, "top-k oracle");
  const std::vector<int> pred{13, 10, 0}, truth{10, 13, 3};
  const double ns = metrics::tof_mae_ns(pred, truth, 60e6);
  o.require(std::abs(ns - 50.0) <= 1e-6, "3-class error = 50 ns");
  o.detail << "top-k mismatches " << mismatches << " over " << rows << " rows x 3 k, ToF "
           << std::setprecision(10) << ns << " ns";
}

struct Criterion {
  int id;
  const char* title;
  void (*run)(Outcome&);
};

const Criterion kCriteria[] = {
    {1, "mask bookkeeping", mask_bookkeeping},
    {2, "parameter counts", parameter_counts},
    {3, "gradient correctness", gradient_correctness},
    {4, "matched-filter labeler", labeler},
    {5, "pre-training learns", pretraining_learns},
    {6, "pre-training beats scratch", pretraining_beats_scratch},
    {7, "patch-size direction", patch_size_direction},
    {8, "entropy", entropy},
    {9, "determinism and persistence", determinism},
    {10, "metric oracles", metric_oracles},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: usmae_acceptance [--criterion N]\n";
      return 2;
    }
  }
  bool all_pass = true;
  bool ran = false;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    ran = true;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title
              << "): " << o.detail.str() << " [" << std::fixed << std::setprecision(1) << secs
              << " s]" << std::endl;
    all_pass = all_pass && o.pass;
  }
  if (!ran) {
    std::cerr << "unknown criterion " << only << "\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}

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

#include "usmae/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "usmae/error.hpp"
#include "usmae/io/formats.hpp"
#include "usmae/labeling/matched_filter.hpp"
#include "usmae/metrics/metrics.hpp"
#include "usmae/model/mae.hpp"
#include "usmae/patching/patching.hpp"
#include "usmae/signal/synth.hpp"
#include "usmae/training/trainer.hpp"

namespace usmae::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  p += suffix;
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  io::write_bytes_atomic(
      path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// --- gen-data ----------------------------------------------------------------

struct GenArgs {
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  std::string out;
  double freq_min = 1.0, freq_max = 4.0;  // MHz
  double amp_min = 0.2, amp_max = 1.0;
  int burst_min = 200, burst_max = 400;
  double snr_min = 18.0, snr_max = 38.0;
  int onset_min = 0, onset_max = 199;
  std::string envelope = "hann";
  bool no_noise = false;
  unsigned threads = 1;
};

int cmd_gen_data(const GenArgs& a, std::ostream& out) {
  signal::DatasetSpec spec;
  spec.count = a.count;
  spec.seed = a.seed;
  spec.frequency_hz = {a.freq_min * 1e6, a.freq_max * 1e6};
  spec.amplitude = {a.amp_min, a.amp_max};
  spec.burst_length = {a.burst_min, a.burst_max};
  spec.peak_snr_db = {a.snr_min, a.snr_max};
  spec.onset = {a.onset_min, a.onset_max};
  spec.envelope = signal::parse_envelope(a.envelope);
  spec.noise = !a.no_noise;
  spec.validate();
  if (spec.onset.max > labeling::kMaxClass) {
    throw InvalidArgument("onset range exceeds the " +
                          std::to_string(labeling::kMaxClass + 1) + " ToF classes");
  }
  if (a.count > UINT32_MAX) throw InvalidArgument("--count too large for the US1D format");

  const auto records = signal::generate_dataset(spec, a.threads);
  io::Us1dFile file;
  file.signal_length = static_cast<std::uint16_t>(spec.signal_length);
  file.sample_rate_hz = static_cast<std::uint32_t>(spec.sample_rate_hz);
  file.has_labels = true;
  for (const auto& r : records) {
    file.signals.push_back(r.samples);
    file.labels.push_back(static_cast<std::uint16_t>(r.label));
  }
  io::write_us1d(a.out, file);

  std::map<int, std::size_t> per_class;
  for (const auto& r : records) ++per_class[r.label];
  const auto [lo, hi] = std::minmax_element(
      per_class.begin(), per_class.end(),
      [](const auto& x, const auto& y) { return x.second < y.second; });
  out << "wrote " << records.size() << " signals to " << a.out << "\n"
      << "entropy       " << std::fixed << std::setprecision(4)
      << signal::shannon_entropy(records) << " bits\n"
      << "labels        " << per_class.begin()->first << ".." << per_class.rbegin()->first
      << " (" << per_class.size() << " classes)\n"
      << "class counts  min " << lo->second << " (class " << lo->first << "), max "
      << hi->second << " (class " << hi->first << ")\n";
  return kOk;
}

// --- shared model flags --------------------------------------------------------

struct TrainArgs {
  std::string data, val, out, init, log, best, report;
  std::string model = "M";
  std::size_t patch_size = 0;  // 0: preset default
  double mask_ratio = 0.75;
  double dropout = -1.0;       // negative: keep model default
  std::size_t epochs = 200;
  std::size_t batch = 1024;
  std::uint64_t seed = 0;
  double lr = 0.0;             // 0: recipe default
  double warmup = -1.0;
  double weight_decay = 1e-4;
  double clip = 1.0;
  std::size_t k = 5;
  bool quiet = false;
};

void add_train_flags(CLI::App* c, TrainArgs& a) {
  c->add_option("--data", a.data, "Training set (US1D)")->required();
  c->add_option("--val", a.val, "Validation set (US1D)");
  c->add_option("--out", a.out, "Final checkpoint path")->required();
  c->add_option("--epochs", a.epochs, "Training epochs")->capture_default_str();
  c->add_option("--batch", a.batch, "Batch size")->capture_default_str();
  c->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  c->add_option("--lr", a.lr, "Base learning rate (default: recipe value)");
  c->add_option("--warmup", a.warmup, "Warmup fraction of total steps");
  c->add_option("--weight-decay", a.weight_decay, "AdamW weight decay")->capture_default_str();
  c->add_option("--clip", a.clip, "Global gradient-norm clip (0 disables)")->capture_default_str();
  c->add_option("--log", a.log, "Metric CSV (default: <out>.csv)");
  c->add_option("--best", a.best, "Best-validation checkpoint (default: <out>.best.umae)");
  c->add_flag("--quiet", a.quiet, "No per-epoch progress");
}

model::ModelConfig model_from_flags(const TrainArgs& a) {
  auto m = model::preset(a.model);
  if (a.patch_size != 0) {
    if (!patching::is_supported_patch_size(a.patch_size)) {
      throw InvalidArgument("--patch-size must be one of 8, 16, 32, 64, 128");
    }
    m.patch_size = a.patch_size;
  }
  m.mask_ratio = a.mask_ratio;
  if (a.dropout >= 0.0) m.dropout = a.dropout;
  m.validate();
  return m;
}

training::TrainConfig train_config(const TrainArgs& a, training::Mode mode) {
  auto c = training::default_train_config(mode);
  c.epochs = a.epochs;
  c.batch_size = a.batch;
  c.seed = a.seed;
  if (a.lr > 0.0) c.base_lr = a.lr;
  if (a.warmup >= 0.0) c.warmup_fraction = a.warmup;
  c.adamw.weight_decay = a.weight_decay;
  c.clip_norm = a.clip;
  c.topk = a.k;
  c.checkpoint_out = a.out;
  c.best_out = a.best.empty() ? sibling(a.out, ".best.umae").string() : a.best;
  c.log_out = a.log.empty() ? sibling(a.out, ".csv").string() : a.log;
  c.validate();
  return c;
}

training::Dataset load_dataset(const std::string& path, std::size_t signal_length) {
  auto d = training::Dataset::from_us1d(io::read_us1d(path));
  if (d.signal_length != signal_length) {
    throw InvalidArgument("'" + path + "' holds signals of length " +
                          std::to_string(d.signal_length) + ", the model expects " +
                          std::to_string(signal_length));
  }
  return d;
}

training::EpochCallback progress(std::ostream& out, bool quiet, bool supervised) {
  if (quiet) return {};
  return [&out, supervised](const training::EpochSummary& e) {
    out << "epoch " << std::setw(4) << e.epoch << "  train " << std::setprecision(5)
        << e.train_loss;
    if (e.val_loss) out << "  val " << *e.val_loss;
    if (supervised && e.val_report) {
      out << "  top1 " << e.val_report->top1 << "  top" << e.val_report->k << " "
          << e.val_report->topk;
    } else if (e.val_loss) {
      out << "  (" << *e.val_loss * training::kAmplitudeUnitsPerNormalized << " LSB)";
    }
    out << "  lr " << e.last_lr << "  " << std::setprecision(3) << e.seconds << " s\n";
    out.flush();
  };
}

int cmd_pretrain(const TrainArgs& a, std::ostream& out) {
  const auto m = model_from_flags(a);
  auto cfg = train_config(a, training::Mode::kPretrain);
  cfg.checkpoint_in = a.init;
  const auto train = load_dataset(a.data, m.signal_length);
  std::optional<training::Dataset> val;
  if (!a.val.empty()) val = load_dataset(a.val, m.signal_length);
  out << "pre-training " << m.name << " (P=" << m.patch_size << ", mask "
      << m.mask_ratio << ") on " << train.size() << " signals\n";
  const auto res = training::pretrain(train, val ? &*val : nullptr, m, cfg,
                                      progress(out, a.quiet, false));
  out << "final checkpoint " << cfg.checkpoint_out << "\nbest checkpoint  " << cfg.best_out
      << " (epoch " << res.best_epoch << ")\nlog              " << cfg.log_out << "\n";
  return kOk;
}

int cmd_finetune(const TrainArgs& a, bool model_given, bool patch_given, std::ostream& out) {
  const bool scratch = a.init == "random";
  model::ModelConfig m;
  std::optional<training::LoadedModel> encoder;
  if (scratch) {
    m = model_from_flags(a);
  } else {
    encoder = training::load_model(io::read_checkpoint(a.init), model::kEncoder);
    m = encoder->config;
    if ((model_given && model::preset(a.model).name != m.name) ||
        (patch_given && a.patch_size != m.patch_size)) {
      throw CompatibilityError("checkpoint '" + a.init + "' holds model " + m.name +
                               " with P=" + std::to_string(m.patch_size) +
                               ", which conflicts with the requested architecture");
    }
    if (a.dropout >= 0.0) m.dropout = a.dropout;
  }
  if (a.k != 2 && a.k != 5) throw InvalidArgument("--k must be 2 or 5");
  auto cfg = train_config(a, scratch ? training::Mode::kScratch : training::Mode::kFinetune);
  const auto train = load_dataset(a.data, m.signal_length);
  if (!train.labeled()) throw InvalidArgument("'" + a.data + "' has no labels");
  std::optional<training::Dataset> val;
  if (!a.val.empty()) {
    val = load_dataset(a.val, m.signal_length);
    if (!val->labeled()) throw InvalidArgument("'" + a.val + "' has no labels");
  }
  out << (scratch ? "training from scratch " : "fine-tuning ") << m.name
      << " (P=" << m.patch_size << ") on " << train.size() << " labelled signals\n";
  auto res = training::finetune(train, val ? &*val : nullptr, m, cfg,
                                encoder ? &encoder->params : nullptr,
                                progress(out, a.quiet, true));
  const auto& eval_set = val ? *val : train;
  const auto report = res.final_report
                          ? *res.final_report
                          : training::evaluate_classifier(res.params, m, eval_set, a.k);
  out << "\nevaluation on " << (val ? "validation" : "training") << " data\n";
  metrics::print_report(out, report);
  std::ostringstream csv;
  metrics::write_report_csv(csv, report);
  const fs::path report_path = a.report.empty() ? sibling(a.out, ".report.csv") : fs::path(a.report);
  write_text(report_path, csv.str());
  out << "checkpoint " << cfg.checkpoint_out << "\nreport     " << report_path.string()
      << "\n";
  return kOk;
}

// --- eval / entropy / label / reconstruct ------------------------------------------

int cmd_eval(const std::string& data, const std::string& ckpt, std::size_t k,
             const std::string& report_path, std::ostream& out) {
  if (k != 2 && k != 5) throw InvalidArgument("--k must be 2 or 5");
  auto loaded = training::load_model(io::read_checkpoint(ckpt), model::kFinetuneParts);
  const auto ds = load_dataset(data, loaded.config.signal_length);
  if (!ds.labeled()) throw InvalidArgument("'" + data + "' has no labels");
  const auto report = training::evaluate_classifier(loaded.params, loaded.config, ds, k);
  metrics::print_report(out, report);
  if (!report_path.empty()) {
    std::ostringstream csv;
    metrics::write_report_csv(csv, report);
    write_text(report_path, csv.str());
  }
  return kOk;
}

int cmd_entropy(const std::string& data, std::ostream& out) {
  const auto file = io::read_us1d(data);
  signal::Histogram h{};
  for (const auto& s : file.signals) {
    for (std::uint8_t v : s) ++h[v];
  }
  out << std::fixed << std::setprecision(4) << signal::shannon_entropy(h) << "\n";
  return kOk;
}

struct LabelArgs {
  std::string data, out, templ;
  double freq = 0.0;  // MHz
  int burst = 0;
  std::string envelope = "hann";
  unsigned threads = 1;
};

int cmd_label(const LabelArgs& a, std::ostream& out) {
  auto file = io::read_us1d(a.data);
  std::vector<double> tmpl;
  if (!a.templ.empty()) {
    const auto t = io::read_us1d(a.templ);
    if (t.count() == 0) throw InvalidArgument("template file is empty");
    if (t.signal_length != file.signal_length) {
      throw InvalidArgument("template length differs from the data");
    }
    tmpl = labeling::centered(t.signals[0]);
  } else {
    if (a.freq <= 0.0 || a.burst <= 0) {
      throw InvalidArgument("give --template FILE or both --freq and --burst");
    }
    signal::DatasetSpec spec;
    spec.signal_length = file.signal_length;
    spec.sample_rate_hz = file.sample_rate_hz;
    signal::BurstParams p;
    p.frequency_hz = a.freq * 1e6;
    p.burst_length = a.burst;
    p.envelope = signal::parse_envelope(a.envelope);
    tmpl = signal::excitation_template(p, spec);
  }
  std::vector<std::uint16_t> labels(file.count());
  std::vector<std::string> errors(file.count());
  const unsigned threads = std::max(1u, std::min<unsigned>(a.threads, static_cast<unsigned>(std::max<std::size_t>(1, file.count()))));
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < file.count(); i += threads) {
      try {
        labels[i] = static_cast<std::uint16_t>(
            labeling::tof_label(labeling::centered(file.signals[i]), tmpl));
      } catch (const InvalidArgument& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw InvalidArgument("record " + std::to_string(i) + ": " + errors[i]);
  }
  if (file.has_labels) {
    std::size_t same = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) same += labels[i] == file.labels[i];
    out << "agreement with stored labels " << same << "/" << labels.size() << "\n";
  }
  file.labels = std::move(labels);
  file.has_labels = true;
  io::write_us1d(a.out, file);
  out << "labelled " << file.count() << " signals into " << a.out << "\n";
  return kOk;
}

struct ReconArgs {
  std::string data, ckpt, out;
  double mask_ratio = -1.0;
  std::uint64_t seed = 0;
  std::size_t limit = 0;
};

int cmd_reconstruct(const ReconArgs& a, std::ostream& out) {
  auto loaded = training::load_model(io::read_checkpoint(a.ckpt), model::kPretrainParts);
  auto& m = loaded.config;
  if (a.mask_ratio >= 0.0) m.mask_ratio = a.mask_ratio;
  m.validate();
  const auto file = io::read_us1d(a.data);
  if (file.signal_length != m.signal_length) {
    throw InvalidArgument("signal length differs from the checkpoint's model");
  }
  const std::size_t n = a.limit == 0 ? file.count() : std::min(a.limit, file.count());
  std::ostringstream csv;
  csv << "record,sample,original,visible,reconstruction\n" << std::setprecision(9);
  double l1 = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = signal::dequantize_8bit(file.signals[r]);
    Rng rng = Rng::substream(a.seed, {0x5243, r});
    const auto plan = patching::sample_mask(m.patch_count(), m.mask_ratio, rng);
    const auto recon = model::reconstruct(loaded.params, m, x, plan);
    const auto target = diff::Tensor({m.patch_count(), m.patch_size}, x);
    l1 += model::mae_loss(recon, target, plan);
    std::vector<std::uint8_t> visible(m.patch_count(), 1);
    for (std::size_t i : plan.masked) visible[i] = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      csv << r << ',' << t << ',' << x[t] << ',' << int(visible[t / m.patch_size]) << ','
          << recon[t] << '\n';
    }
  }
  write_text(a.out, csv.str());
  out << "reconstructed " << n << " signals into " << a.out << "\n";
  if (n > 0) {
    out << "masked L1 " << std::setprecision(5) << l1 / static_cast<double>(n) << " ("
        << l1 / static_cast<double>(n) * training::kAmplitudeUnitsPerNormalized
        << " LSB)\n";
  }
  return kOk;
}

}  // namespace

unsigned default_threads() {
  if (const char* env = std::getenv("USMAE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::vector<std::string> injected;
  bool seen = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file name");
      path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    seen = true;
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(line);
      if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw CLI::ConversionError(path + ":" + std::to_string(lineno) +
                                   ": expected key=value");
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      }
      if (key.starts_with("--")) key = key.substr(2);
      injected.push_back("--" + key + "=" + value);
    }
  }
  if (!seen) return rest;
  // Config values go right after the subcommand name, before explicit flags.
  const auto at = rest.empty() ? rest.begin() : rest.begin() + 1;
  rest.insert(at, injected.begin(), injected.end());
  return rest;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Masked-autoencoder toolkit for ultrasonic time-of-flight classification",
               "usmae"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "usmae 1.0.0");
  app.footer("Any subcommand accepts --config FILE with key=value lines mirroring its flags.\n"
             "Exit codes: 0 ok, 2 usage, 3 I/O, 4 numeric, 5 incompatible checkpoint.");

  GenArgs gen;
  gen.threads = default_threads();
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic tone-burst dataset");
  g->add_option("--count", gen.count, "Number of signals")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output US1D file")->required();
  g->add_option("--freq-min", gen.freq_min, "Minimum frequency [MHz]")->capture_default_str();
  g->add_option("--freq-max", gen.freq_max, "Maximum frequency [MHz]")->capture_default_str();
  g->add_option("--amp-min", gen.amp_min, "Minimum amplitude")->capture_default_str();
  g->add_option("--amp-max", gen.amp_max, "Maximum amplitude")->capture_default_str();
  g->add_option("--burst-min", gen.burst_min, "Minimum burst length [samples]")->capture_default_str();
  g->add_option("--burst-max", gen.burst_max, "Maximum burst length [samples]")->capture_default_str();
  g->add_option("--snr-min", gen.snr_min, "Minimum peak SNR [dB]")->capture_default_str();
  g->add_option("--snr-max", gen.snr_max, "Maximum peak SNR [dB]")->capture_default_str();
  g->add_option("--onset-min", gen.onset_min, "Minimum onset [samples]")->capture_default_str();
  g->add_option("--onset-max", gen.onset_max, "Maximum onset [samples]")->capture_default_str();
  g->add_option("--envelope", gen.envelope, "hann or rectangular")->capture_default_str();
  g->add_flag("--no-noise", gen.no_noise, "Skip additive noise");
  g->add_option("--threads", gen.threads, "Worker threads (default: USMAE_THREADS or 1)");

  TrainArgs pre;
  auto* p = app.add_subcommand("pretrain", "Masked-reconstruction pre-training");
  add_train_flags(p, pre);
  p->add_option("--model", pre.model, "Preset: T, S, M, L, M-dh32, M-dh64, ...")->capture_default_str();
  p->add_option("--patch-size", pre.patch_size, "Patch size (8, 16, 32, 64, 128)");
  p->add_option("--mask-ratio", pre.mask_ratio, "Fraction of masked patches")->capture_default_str();
  p->add_option("--dropout", pre.dropout, "Dropout rate (default 0.1)");
  p->add_option("--init", pre.init, "Continue from a pre-training checkpoint");

  TrainArgs fin;
  auto* f = app.add_subcommand("finetune", "Supervised ToF classification");
  add_train_flags(f, fin);
  f->add_option("--init", fin.init, "Pre-trained checkpoint, or 'random' to train from scratch")
      ->required();
  f->add_option("--k", fin.k, "Top-k accuracy to report (2 or 5)")->capture_default_str();
  auto* f_model = f->add_option("--model", fin.model, "Preset for --init random")->capture_default_str();
  auto* f_patch = f->add_option("--patch-size", fin.patch_size, "Patch size for --init random");
  f->add_option("--dropout", fin.dropout, "Dropout rate (default 0.1)");
  f->add_option("--report", fin.report, "Report CSV (default: <out>.report.csv)");

  std::string ev_data, ev_ckpt, ev_report;
  std::size_t ev_k = 5;
  auto* e = app.add_subcommand("eval", "Evaluate a fine-tuned checkpoint");
  e->add_option("--data", ev_data, "Labelled US1D file")->required();
  e->add_option("--ckpt", ev_ckpt, "Fine-tuned checkpoint")->required();
  e->add_option("--k", ev_k, "Top-k accuracy to report (2 or 5)")->capture_default_str();
  e->add_option("--report", ev_report, "Optional report CSV");

  std::string en_data;
  auto* en = app.add_subcommand("entropy", "Shannon entropy of the 8-bit amplitudes");
  en->add_option("--data", en_data, "US1D file")->required();

  LabelArgs lab;
  lab.threads = default_threads();
  auto* l = app.add_subcommand("label", "Matched-filter ToF labels");
  l->add_option("--data", lab.data, "US1D file")->required();
  l->add_option("--out", lab.out, "Labelled US1D output")->required();
  l->add_option("--template", lab.templ, "US1D file whose first record is the excitation");
  l->add_option("--freq", lab.freq, "Template frequency [MHz]");
  l->add_option("--burst", lab.burst, "Template burst length [samples]");
  l->add_option("--envelope", lab.envelope, "Template envelope")->capture_default_str();
  l->add_option("--threads", lab.threads, "Worker threads (default: USMAE_THREADS or 1)");

  ReconArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Masked reconstructions as CSV");
  r->add_option("--data", rec.data, "US1D file")->required();
  r->add_option("--ckpt", rec.ckpt, "Pre-training checkpoint")->required();
  r->add_option("--out", rec.out, "Output CSV")->required();
  r->add_option("--mask-ratio", rec.mask_ratio, "Mask ratio (default: checkpoint value)");
  r->add_option("--seed", rec.seed, "Mask seed")->capture_default_str();
  r->add_option("--limit", rec.limit, "Only the first N records (0: all)")->capture_default_str();

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& ex) {
    std::ostringstream o, er;
    const int code = app.exit(ex, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kOk : kUsage;
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << "\n";
    return kIo;
  }

  try {
    if (*g) return cmd_gen_data(gen, out);
    if (*p) return cmd_pretrain(pre, out);
    if (*f) return cmd_finetune(fin, f_model->count() > 0, f_patch->count() > 0, out);
    if (*e) return cmd_eval(ev_data, ev_ckpt, ev_k, ev_report, out);
    if (*en) return cmd_entropy(en_data, out);
    if (*l) return cmd_label(lab, out);
    if (*r) return cmd_reconstruct(rec, out);
  } catch (const CompatibilityError& ex) {
    err << "error: " << ex.what() << "\n";
    return kCompatibility;
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << "\n";
    return kIo;
  } catch (const NumericError& ex) {
    err << "error: " << ex.what() << "\n";
    return kNumeric;
  } catch (const InvalidArgument& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kNumeric;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kIo;
  }
  return kUsage;
}

}  // namespace usmae::cli

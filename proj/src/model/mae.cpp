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

#include "usmae/model/mae.hpp"

#include <algorithm>
#include <cmath>

#include "usmae/error.hpp"

namespace usmae::model {

using diff::Var;

namespace {

constexpr double kInitStd = 0.02;

bool is_bias(const std::string& name) {
  const auto dot = name.rfind('.');
  const std::string leaf = name.substr(dot + 1);
  return leaf == "b" || (leaf.size() == 2 && leaf[0] == 'b');
}

bool is_gain(const std::string& name) { return name.ends_with(".g"); }

// FNV-1a; keys each tensor's init stream by name so the values do not depend
// on which other parts are present.
std::uint64_t name_key(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

diff::ParamSet init_params(const ModelConfig& config, std::uint64_t seed,
                           unsigned parts) {
  diff::ParamSet params;
  for (const auto& spec : param_layout(config, parts)) {
    Rng rng = Rng::substream(seed, {0x1A17, name_key(spec.name)});
    diff::Tensor t(spec.shape);
    if (is_gain(spec.name)) {
      t.fill(1.0f);
    } else if (!is_bias(spec.name)) {
      for (float& v : t.values()) {
        double z;
        do {
          z = rng.normal();
        } while (std::abs(z) > 2.0);
        v = static_cast<float>(kInitStd * z);
      }
    }
    params.add(spec.name, std::move(t));
  }
  return params;
}

void check_params(const ModelConfig& config, const diff::ParamSet& params,
                  unsigned parts) {
  const auto layout = param_layout(config, parts);
  if (layout.size() != params.size()) {
    throw CompatibilityError("parameter set has " + std::to_string(params.size()) +
                             " tensors, model '" + config.name + "' needs " +
                             std::to_string(layout.size()));
  }
  for (const auto& spec : layout) {
    const auto idx = params.find(spec.name);
    if (!idx) throw CompatibilityError("missing parameter '" + spec.name + "'");
    if (params[*idx].value.shape() != spec.shape) {
      throw CompatibilityError("parameter '" + spec.name + "' has shape " +
                               diff::shape_string(params[*idx].value.shape()) +
                               ", expected " + diff::shape_string(spec.shape));
    }
  }
}

template <typename T>
BasicPretrainBatch<T> make_pretrain_batch(
    std::span<const std::vector<float>> signals,
    std::span<const patching::MaskPlan> plans, std::size_t patch_size) {
  if (signals.empty() || signals.size() != plans.size()) {
    throw InvalidArgument("pretrain batch needs one mask plan per signal");
  }
  const std::size_t B = signals.size();
  const std::size_t L = signals[0].size();
  if (patch_size == 0 || L % patch_size != 0) {
    throw InvalidArgument("patch size does not divide the signal length");
  }
  const std::size_t N = L / patch_size;
  const std::size_t n_vis = plans[0].visible.size();
  BasicPretrainBatch<T> out;
  out.batch = B;
  out.patch_count = N;
  out.visible = diff::BasicTensor<T>({B * n_vis, patch_size});
  out.target = diff::BasicTensor<T>({B * N, patch_size});
  out.visible_pos.reserve(B * n_vis);
  out.masked.assign(B * N, 0);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& s = signals[b];
    const auto& plan = plans[b];
    if (s.size() != L) throw InvalidArgument("pretrain batch: signal lengths differ");
    if (plan.patch_count != N || plan.visible.size() != n_vis) {
      throw InvalidArgument("pretrain batch: mask plans must agree in size");
    }
    std::copy(s.begin(), s.end(), out.target.data() + b * L);
    for (std::size_t k = 0; k < n_vis; ++k) {
      const std::size_t i = plan.visible[k];
      std::copy_n(s.begin() + static_cast<std::ptrdiff_t>(i * patch_size), patch_size,
                  out.visible.data() + (b * n_vis + k) * patch_size);
      out.visible_pos.push_back(i);
    }
    for (std::size_t i : plan.masked) out.masked[b * N + i] = 1;
  }
  return out;
}

template <typename T>
BasicClassifyBatch<T> make_classify_batch(std::span<const std::vector<float>> signals,
                                          std::span<const int> labels,
                                          std::size_t patch_size) {
  if (signals.empty()) throw InvalidArgument("classify batch is empty");
  if (!labels.empty() && labels.size() != signals.size()) {
    throw InvalidArgument("classify batch: label count differs from signal count");
  }
  const std::size_t B = signals.size();
  const std::size_t L = signals[0].size();
  if (patch_size == 0 || L % patch_size != 0) {
    throw InvalidArgument("patch size does not divide the signal length");
  }
  BasicClassifyBatch<T> out;
  out.batch = B;
  out.patches = diff::BasicTensor<T>({B * (L / patch_size), patch_size});
  for (std::size_t b = 0; b < B; ++b) {
    if (signals[b].size() != L) throw InvalidArgument("classify batch: signal lengths differ");
    std::copy(signals[b].begin(), signals[b].end(), out.patches.data() + b * L);
  }
  out.labels.assign(labels.begin(), labels.end());
  return out;
}

template BasicPretrainBatch<float> make_pretrain_batch<float>(
    std::span<const std::vector<float>>, std::span<const patching::MaskPlan>, std::size_t);
template BasicPretrainBatch<double> make_pretrain_batch<double>(
    std::span<const std::vector<float>>, std::span<const patching::MaskPlan>, std::size_t);
template BasicClassifyBatch<float> make_classify_batch<float>(
    std::span<const std::vector<float>>, std::span<const int>, std::size_t);
template BasicClassifyBatch<double> make_classify_batch<double>(
    std::span<const std::vector<float>>, std::span<const int>, std::size_t);

template <typename T>
Network<T>::Network(diff::BasicGraph<T>& graph, const ModelConfig& config,
                    Rng* dropout_rng, bool training)
    : g_(graph), cfg_(config), rng_(dropout_rng), training_(training) {
  cfg_.validate();
}

template <typename T>
Var Network<T>::drop(Var x) {
  if (!training_ || rng_ == nullptr) return x;
  return g_.dropout(x, static_cast<T>(cfg_.dropout), *rng_, true);
}

template <typename T>
Var Network<T>::embed_patches(Var patches, std::span<const std::size_t> positions) {
  const auto& X = g_.value(patches);
  if (X.rank() != 2 || X.dim(1) != cfg_.patch_size) {
    throw DimensionError("embed_patches: patches " + diff::shape_string(X.shape()) +
                         " do not have width P = " + std::to_string(cfg_.patch_size));
  }
  if (positions.size() != X.dim(0)) {
    throw DimensionError("embed_patches: one position per patch row required");
  }
  const Var proj = g_.linear(patches, p("enc.proj.w"), p("enc.proj.b"));
  return g_.add(proj, g_.gather_rows(p("enc.pos"), positions));
}

template <typename T>
Var Network<T>::mhsa(Var x, const std::string& prefix, std::size_t batch,
                     std::size_t heads) {
  const Var q = g_.linear(x, p(prefix + "attn.wq"), p(prefix + "attn.bq"));
  const Var k = g_.linear(x, p(prefix + "attn.wk"), p(prefix + "attn.bk"));
  const Var v = g_.linear(x, p(prefix + "attn.wv"), p(prefix + "attn.bv"));
  const Var a = g_.attention(q, k, v, batch, heads);
  return g_.linear(a, p(prefix + "attn.wo"), p(prefix + "attn.bo"));
}

template <typename T>
Var Network<T>::block(Var x, const std::string& prefix, std::size_t batch,
                      std::size_t heads) {
  const T eps = static_cast<T>(cfg_.ln_eps);
  Var h = g_.layer_norm(x, p(prefix + "ln1.g"), p(prefix + "ln1.b"), eps);
  x = g_.add(x, drop(mhsa(h, prefix, batch, heads)));
  h = g_.layer_norm(x, p(prefix + "ln2.g"), p(prefix + "ln2.b"), eps);
  h = g_.gelu(g_.linear(h, p(prefix + "mlp.w1"), p(prefix + "mlp.b1")));
  h = g_.linear(h, p(prefix + "mlp.w2"), p(prefix + "mlp.b2"));
  return g_.add(x, drop(h));
}

template <typename T>
Var Network<T>::encode(Var patches, std::span<const std::size_t> positions,
                       std::size_t batch) {
  Var x = embed_patches(patches, positions);
  for (std::size_t l = 0; l < cfg_.layers_enc; ++l) {
    x = block(x, "enc.blocks." + std::to_string(l) + ".", batch, cfg_.heads_enc);
  }
  return g_.layer_norm(x, p("enc.norm.g"), p("enc.norm.b"),
                       static_cast<T>(cfg_.ln_eps));
}

template <typename T>
Var Network<T>::decode(Var latents, std::span<const std::size_t> visible_pos,
                       std::size_t batch) {
  const std::size_t N = cfg_.patch_count();
  const auto& Z = g_.value(latents);
  if (Z.rank() != 2 || Z.dim(1) != cfg_.d_model_enc || Z.dim(0) != visible_pos.size() ||
      batch == 0 || Z.dim(0) % batch != 0) {
    throw DimensionError("decode: latents " + diff::shape_string(Z.shape()) +
                         " inconsistent with " + std::to_string(visible_pos.size()) +
                         " visible positions over batch " + std::to_string(batch));
  }
  const std::size_t n_vis = Z.dim(0) / batch;
  std::vector<std::size_t> slots(visible_pos.size());
  for (std::size_t r = 0; r < slots.size(); ++r) {
    if (visible_pos[r] >= N) throw DimensionError("decode: position out of range");
    slots[r] = (r / n_vis) * N + visible_pos[r];
  }
  std::vector<std::size_t> all_pos(batch * N);
  for (std::size_t r = 0; r < all_pos.size(); ++r) all_pos[r] = r % N;

  const Var proj = g_.linear(latents, p("dec.proj.w"), p("dec.proj.b"));
  Var x = g_.scatter_rows(proj, slots, p("dec.mask_token"), batch * N);
  x = g_.add(x, g_.gather_rows(p("dec.pos"), all_pos));
  for (std::size_t l = 0; l < cfg_.layers_dec; ++l) {
    x = block(x, "dec.blocks." + std::to_string(l) + ".", batch, cfg_.heads_dec);
  }
  x = g_.layer_norm(x, p("dec.norm.g"), p("dec.norm.b"), static_cast<T>(cfg_.ln_eps));
  return g_.linear(x, p("dec.head.w"), p("dec.head.b"));
}

template <typename T>
Var Network<T>::classify(Var patches, std::size_t batch) {
  const std::size_t N = cfg_.patch_count();
  const auto& X = g_.value(patches);
  if (X.rank() != 2 || X.dim(0) != batch * N) {
    throw DimensionError("classify: expected " + std::to_string(batch * N) +
                         " patch rows, got " + diff::shape_string(X.shape()));
  }
  std::vector<std::size_t> pos(batch * N);
  for (std::size_t r = 0; r < pos.size(); ++r) pos[r] = r % N;
  const Var z = encode(patches, pos, batch);
  const Var pooled = g_.mean_rows(z, batch);
  return g_.linear(pooled, p("cls.head.w"), p("cls.head.b"));
}

template <typename T>
Var Network<T>::pretrain_loss(const BasicPretrainBatch<T>& batch, Var* reconstruction) {
  const Var patches = g_.constant(batch.visible);
  const Var z = encode(patches, batch.visible_pos, batch.batch);
  const Var recon = decode(z, batch.visible_pos, batch.batch);
  if (reconstruction) *reconstruction = recon;
  return g_.masked_l1(recon, batch.target, batch.masked);
}

template <typename T>
Var Network<T>::classify_loss(const BasicClassifyBatch<T>& batch, Var* logits) {
  const Var out = classify(g_.constant(batch.patches), batch.batch);
  if (logits) *logits = out;
  return g_.cross_entropy(out, batch.labels);
}

template class Network<float>;
template class Network<double>;

diff::Tensor encode(diff::ParamSet& params, const ModelConfig& config,
                    const patching::Partition& part) {
  if (part.patch_size != config.patch_size) {
    throw DimensionError("encode: partition patch size differs from the config");
  }
  diff::Graph g(&params);
  Network<float> net(g, config);
  const std::size_t n = part.visible_indices.size();
  const Var x = g.constant(diff::Tensor({n, config.patch_size}, part.visible));
  return g.value(net.encode(x, part.visible_indices, 1));
}

diff::Tensor decode(diff::ParamSet& params, const ModelConfig& config,
                    const diff::Tensor& latents, const patching::MaskPlan& plan) {
  if (plan.patch_count != config.patch_count()) {
    throw DimensionError("decode: plan covers " + std::to_string(plan.patch_count) +
                         " patches, config has " + std::to_string(config.patch_count()));
  }
  diff::Graph g(&params);
  Network<float> net(g, config);
  return g.value(net.decode(g.constant(latents), plan.visible, 1));
}

float mae_loss(const diff::Tensor& reconstruction, const diff::Tensor& target,
               const patching::MaskPlan& plan) {
  if (plan.masked.empty()) throw InvalidArgument("mae_loss: empty masked set");
  if (reconstruction.rank() != 2 || plan.patch_count != reconstruction.dim(0)) {
    throw DimensionError("mae_loss: reconstruction " +
                         diff::shape_string(reconstruction.shape()) +
                         " does not match the mask plan");
  }
  std::vector<std::uint8_t> flags(plan.patch_count, 0);
  for (std::size_t i : plan.masked) flags.at(i) = 1;
  diff::Graph g;
  return g.value(g.masked_l1(g.constant(reconstruction), target, flags))[0];
}

diff::Tensor reconstruct(diff::ParamSet& params, const ModelConfig& config,
                         std::span<const float> signal,
                         const patching::MaskPlan& plan) {
  const auto grid = patching::patchify(signal, config.patch_size);
  const auto part = patching::split_visible(grid, plan);
  return decode(params, config, encode(params, config, part), plan);
}

diff::Tensor classify_logits(diff::ParamSet& params, const ModelConfig& config,
                             std::span<const std::vector<float>> signals) {
  const auto batch = make_classify_batch<float>(signals, {}, config.patch_size);
  diff::Graph g(&params);
  Network<float> net(g, config);
  return g.value(net.classify(g.constant(batch.patches), batch.batch));
}

std::vector<float> classify_logits(diff::ParamSet& params, const ModelConfig& config,
                                   std::span<const float> signal) {
  std::vector<std::vector<float>> one{std::vector<float>(signal.begin(), signal.end())};
  const auto t = classify_logits(params, config, one);
  return {t.values().begin(), t.values().end()};
}

}  // namespace usmae::model

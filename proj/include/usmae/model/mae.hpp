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
#include <span>
#include <string>
#include <vector>

#include "usmae/diffcore/graph.hpp"
#include "usmae/model/config.hpp"
#include "usmae/patching/patching.hpp"
#include "usmae/rng.hpp"

namespace usmae::model {

/// Fresh parameters for `config`: weights, positional tables and the mask
/// token from N(0, 0.02^2) truncated at two standard deviations, biases zero,
/// layer-norm gains one.
diff::ParamSet init_params(const ModelConfig& config, std::uint64_t seed,
                           unsigned parts = kAllParts);

/// Throws CompatibilityError unless `params` holds exactly the tensors of
/// param_layout(config, parts) with matching shapes.
void check_params(const ModelConfig& config, const diff::ParamSet& params,
                  unsigned parts = kAllParts);

/// A pre-training batch. Every example contributes the same number of
/// visible patches; rows are grouped per example.
template <typename T>
struct BasicPretrainBatch {
  std::size_t batch = 0;
  std::size_t patch_count = 0;
  diff::BasicTensor<T> visible;            // [B * n_visible, P]
  std::vector<std::size_t> visible_pos;    // patch index of each visible row
  diff::BasicTensor<T> target;             // [B * N, P], the full signals
  std::vector<std::uint8_t> masked;        // [B * N], 1 for loss rows
};

template <typename T>
struct BasicClassifyBatch {
  std::size_t batch = 0;
  diff::BasicTensor<T> patches;  // [B * N, P]
  std::vector<int> labels;       // [B]; may be empty for inference
};

using PretrainBatch = BasicPretrainBatch<float>;
using ClassifyBatch = BasicClassifyBatch<float>;

/// Assembles a batch from whole signals (length N * P) and one mask plan per
/// signal. All plans must mask the same number of patches.
template <typename T>
BasicPretrainBatch<T> make_pretrain_batch(
    std::span<const std::vector<float>> signals,
    std::span<const patching::MaskPlan> plans, std::size_t patch_size);

template <typename T>
BasicClassifyBatch<T> make_classify_batch(
    std::span<const std::vector<float>> signals, std::span<const int> labels,
    std::size_t patch_size);

/// The encoder/decoder/classifier wired onto a graph whose ParamSet follows
/// param_layout(config). Dropout is active only with `training` set and a
/// random source given.
template <typename T>
class Network {
 public:
  Network(diff::BasicGraph<T>& graph, const ModelConfig& config,
          Rng* dropout_rng = nullptr, bool training = false);

  /// patches[i] * W_proj + b + pos[positions[i]].
  diff::Var embed_patches(diff::Var patches,
                          std::span<const std::size_t> positions);

  /// Multi-head self-attention with (heads * d_head)-wide projections,
  /// followed by the output projection back to d_model. No residual.
  diff::Var mhsa(diff::Var x, const std::string& prefix, std::size_t batch,
                 std::size_t heads);

  /// Pre-LN transformer block: x + MHSA(LN(x)), then x + MLP(LN(x)).
  diff::Var block(diff::Var x, const std::string& prefix, std::size_t batch,
                  std::size_t heads);

  /// Latents for the given patches, after the final encoder norm.
  diff::Var encode(diff::Var patches, std::span<const std::size_t> positions,
                   std::size_t batch);

  /// Full N-patch reconstruction [batch * N, P]. Visible slots carry the
  /// projected latents, all other slots the shared mask token; both get the
  /// decoder positional embedding.
  diff::Var decode(diff::Var latents, std::span<const std::size_t> visible_pos,
                   std::size_t batch);

  /// Encodes all N patches of each example, mean-pools the latents and maps
  /// them to class logits [batch, num_classes].
  diff::Var classify(diff::Var patches, std::size_t batch);

  /// Masked L1 reconstruction loss of a batch.
  diff::Var pretrain_loss(const BasicPretrainBatch<T>& batch,
                          diff::Var* reconstruction = nullptr);

  /// Mean cross-entropy of a labelled batch.
  diff::Var classify_loss(const BasicClassifyBatch<T>& batch,
                          diff::Var* logits = nullptr);

 private:
  diff::Var p(const std::string& name) { return g_.param(name); }
  diff::Var drop(diff::Var x);

  diff::BasicGraph<T>& g_;
  const ModelConfig& cfg_;
  Rng* rng_;
  bool training_;
};

extern template class Network<float>;
extern template class Network<double>;

// --- single-example inference helpers --------------------------------------

/// Latents [n_visible, d_model_enc] of the visible patches of `part`.
diff::Tensor encode(diff::ParamSet& params, const ModelConfig& config,
                    const patching::Partition& part);

/// Reconstruction [N, P] from latents of the visible patches of `plan`.
diff::Tensor decode(diff::ParamSet& params, const ModelConfig& config,
                    const diff::Tensor& latents, const patching::MaskPlan& plan);

/// Masked L1 between a reconstruction and its target grid, over plan.masked.
float mae_loss(const diff::Tensor& reconstruction, const diff::Tensor& target,
               const patching::MaskPlan& plan);

/// Reconstruction [N, P] of `signal` under `plan`.
diff::Tensor reconstruct(diff::ParamSet& params, const ModelConfig& config,
                         std::span<const float> signal,
                         const patching::MaskPlan& plan);

/// Class logits of a batch of whole signals, [B, num_classes].
diff::Tensor classify_logits(diff::ParamSet& params, const ModelConfig& config,
                             std::span<const std::vector<float>> signals);

std::vector<float> classify_logits(diff::ParamSet& params,
                                   const ModelConfig& config,
                                   std::span<const float> signal);

}  // namespace usmae::model

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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "usmae/diffcore/tensor.hpp"

namespace usmae::model {

/// Architecture of the 1D masked autoencoder.
///
/// Attention projections are d_model x (heads * d_head); d_head need not equal
/// d_model / heads. The MLP hidden width is 2 * d_model.
struct ModelConfig {
  std::string name = "custom";
  std::size_t patch_size = 16;
  std::size_t signal_length = 512;
  std::size_t d_model_enc = 128;
  std::size_t d_model_dec = 64;
  std::size_t heads_enc = 4;
  std::size_t heads_dec = 4;
  std::size_t d_head_enc = 32;
  std::size_t d_head_dec = 16;
  std::size_t layers_enc = 6;
  std::size_t layers_dec = 2;
  double dropout = 0.1;
  double mask_ratio = 0.75;
  std::size_t num_classes = 200;
  double ln_eps = 1e-5;

  std::size_t patch_count() const { return signal_length / patch_size; }
  std::size_t attn_width_enc() const { return heads_enc * d_head_enc; }
  std::size_t attn_width_dec() const { return heads_dec * d_head_dec; }

  /// Throws InvalidArgument on zero extents, a patch size that does not divide
  /// the signal length, or a dropout/mask ratio outside [0, 1).
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Named configurations: T, S, M, L (standard heads, d_head = d_model / h)
/// and the M variants with widened heads: M-dh32, M-dh64, M-dh128,
/// M-dh64-h3, M-dh64-h5. Decoder heads are widened in proportion to the
/// decoder width. All presets default to P = 16 and 75% masking.
ModelConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Encoder blocks, decoder blocks, embeddings (patch projections, positional
/// tables, mask token), heads (reconstruction and classification) and final
/// layer norms, counted separately.
struct ParamCount {
  std::size_t encoder_blocks = 0;
  std::size_t decoder_blocks = 0;
  std::size_t embeddings = 0;
  std::size_t heads = 0;
  std::size_t norms = 0;
  std::size_t total() const {
    return encoder_blocks + decoder_blocks + embeddings + heads + norms;
  }
};

enum class Component { kEncoderBlocks, kDecoderBlocks, kEmbeddings, kHeads, kNorms };

struct ParamSpec {
  std::string name;
  diff::Shape shape;
  Component component;
};

/// Parameter groups. Pre-training uses encoder + decoder; fine-tuning keeps
/// the encoder and adds the classification head.
enum Part : unsigned {
  kEncoder = 1u,
  kDecoder = 2u,
  kClassifier = 4u,
  kPretrainParts = kEncoder | kDecoder,
  kFinetuneParts = kEncoder | kClassifier,
  kAllParts = kEncoder | kDecoder | kClassifier,
};

/// Trainable tensors of the selected parts, in creation order.
std::vector<ParamSpec> param_layout(const ModelConfig& config,
                                    unsigned parts = kAllParts);

ParamCount param_count(const ModelConfig& config);

/// True for parameters that belong to the encoder side (kept for
/// fine-tuning): patch projection, encoder positions, blocks and final norm.
bool is_encoder_param(std::string_view name);

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace usmae::model

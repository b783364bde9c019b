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

#include "usmae/model/config.hpp"

#include "usmae/error.hpp"

namespace usmae::model {

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw InvalidArgument(std::string("model config: ") + what + " must be positive");
  };
  positive(patch_size, "patch size");
  positive(signal_length, "signal length");
  positive(d_model_enc, "encoder width");
  positive(d_model_dec, "decoder width");
  positive(heads_enc, "encoder heads");
  positive(heads_dec, "decoder heads");
  positive(d_head_enc, "encoder head dimension");
  positive(d_head_dec, "decoder head dimension");
  positive(layers_enc, "encoder layers");
  positive(num_classes, "class count");
  if (signal_length % patch_size != 0) {
    throw InvalidArgument("model config: patch size " + std::to_string(patch_size) +
                          " does not divide signal length " +
                          std::to_string(signal_length));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw InvalidArgument("model config: dropout must lie in [0, 1)");
  }
  if (!(mask_ratio > 0.0 && mask_ratio < 1.0)) {
    throw InvalidArgument("model config: mask ratio must lie in (0, 1)");
  }
  if (!(ln_eps > 0.0)) throw InvalidArgument("model config: ln_eps must be positive");
}

namespace {

ModelConfig sized(std::string name, std::size_t d_enc, std::size_t heads,
                  std::size_t layers_enc, std::size_t layers_dec) {
  ModelConfig c;
  c.name = std::move(name);
  c.d_model_enc = d_enc;
  c.d_model_dec = d_enc / 2;
  c.heads_enc = heads;
  c.heads_dec = heads;
  c.d_head_enc = d_enc / heads;
  c.d_head_dec = c.d_model_dec / heads;
  c.layers_enc = layers_enc;
  c.layers_dec = layers_dec;
  return c;
}

ModelConfig widened(std::string name, std::size_t heads, std::size_t d_head) {
  ModelConfig c = sized(std::move(name), 128, heads, 6, 2);
  c.d_head_enc = d_head;
  c.d_head_dec = d_head / 2;
  return c;
}

}  // namespace

ModelConfig preset(std::string_view name) {
  if (name == "T") return sized("T", 32, 1, 2, 1);
  if (name == "S") return sized("S", 64, 2, 3, 1);
  if (name == "M") return sized("M", 128, 4, 6, 2);
  if (name == "L") return sized("L", 192, 6, 9, 3);
  if (name == "M-dh32") return widened("M-dh32", 4, 32);
  if (name == "M-dh64") return widened("M-dh64", 4, 64);
  if (name == "M-dh128") return widened("M-dh128", 4, 128);
  if (name == "M-dh64-h3") return widened("M-dh64-h3", 3, 64);
  if (name == "M-dh64-h5") return widened("M-dh64-h5", 5, 64);
  throw InvalidArgument("unknown model preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"T", "S", "M", "L", "M-dh32", "M-dh64", "M-dh128", "M-dh64-h3", "M-dh64-h5"};
}

namespace {

void add_block(std::vector<ParamSpec>& out, const std::string& prefix,
               std::size_t d, std::size_t width, Component comp) {
  auto add = [&](const std::string& n, diff::Shape s) {
    out.push_back({prefix + n, std::move(s), comp});
  };
  add("ln1.g", {d});
  add("ln1.b", {d});
  add("attn.wq", {d, width});
  add("attn.bq", {width});
  add("attn.wk", {d, width});
  add("attn.bk", {width});
  add("attn.wv", {d, width});
  add("attn.bv", {width});
  add("attn.wo", {width, d});
  add("attn.bo", {d});
  add("ln2.g", {d});
  add("ln2.b", {d});
  add("mlp.w1", {d, 2 * d});
  add("mlp.b1", {2 * d});
  add("mlp.w2", {2 * d, d});
  add("mlp.b2", {d});
}

}  // namespace

namespace {

void add_encoder(std::vector<ParamSpec>& out, const ModelConfig& c) {
  out.push_back({"enc.proj.w", {c.patch_size, c.d_model_enc}, Component::kEmbeddings});
  out.push_back({"enc.proj.b", {c.d_model_enc}, Component::kEmbeddings});
  out.push_back({"enc.pos", {c.patch_count(), c.d_model_enc}, Component::kEmbeddings});
  for (std::size_t l = 0; l < c.layers_enc; ++l) {
    add_block(out, "enc.blocks." + std::to_string(l) + ".", c.d_model_enc,
              c.attn_width_enc(), Component::kEncoderBlocks);
  }
  out.push_back({"enc.norm.g", {c.d_model_enc}, Component::kNorms});
  out.push_back({"enc.norm.b", {c.d_model_enc}, Component::kNorms});
}

void add_decoder(std::vector<ParamSpec>& out, const ModelConfig& c) {
  out.push_back({"dec.proj.w", {c.d_model_enc, c.d_model_dec}, Component::kEmbeddings});
  out.push_back({"dec.proj.b", {c.d_model_dec}, Component::kEmbeddings});
  out.push_back({"dec.mask_token", {c.d_model_dec}, Component::kEmbeddings});
  out.push_back({"dec.pos", {c.patch_count(), c.d_model_dec}, Component::kEmbeddings});
  for (std::size_t l = 0; l < c.layers_dec; ++l) {
    add_block(out, "dec.blocks." + std::to_string(l) + ".", c.d_model_dec,
              c.attn_width_dec(), Component::kDecoderBlocks);
  }
  out.push_back({"dec.norm.g", {c.d_model_dec}, Component::kNorms});
  out.push_back({"dec.norm.b", {c.d_model_dec}, Component::kNorms});
  out.push_back({"dec.head.w", {c.d_model_dec, c.patch_size}, Component::kHeads});
  out.push_back({"dec.head.b", {c.patch_size}, Component::kHeads});
}

}  // namespace

std::vector<ParamSpec> param_layout(const ModelConfig& c, unsigned parts) {
  c.validate();
  std::vector<ParamSpec> out;
  if (parts & kEncoder) add_encoder(out, c);
  if (parts & kDecoder) add_decoder(out, c);
  if (parts & kClassifier) {
    out.push_back({"cls.head.w", {c.d_model_enc, c.num_classes}, Component::kHeads});
    out.push_back({"cls.head.b", {c.num_classes}, Component::kHeads});
  }
  return out;
}

ParamCount param_count(const ModelConfig& config) {
  ParamCount pc;
  for (const auto& p : param_layout(config)) {
    const std::size_t n = diff::shape_numel(p.shape);
    switch (p.component) {
      case Component::kEncoderBlocks: pc.encoder_blocks += n; break;
      case Component::kDecoderBlocks: pc.decoder_blocks += n; break;
      case Component::kEmbeddings: pc.embeddings += n; break;
      case Component::kHeads: pc.heads += n; break;
      case Component::kNorms: pc.norms += n; break;
    }
  }
  return pc;
}

bool is_encoder_param(std::string_view name) { return name.starts_with("enc."); }

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"name", c.name},
                     {"patch_size", c.patch_size},
                     {"signal_length", c.signal_length},
                     {"d_model_enc", c.d_model_enc},
                     {"d_model_dec", c.d_model_dec},
                     {"heads_enc", c.heads_enc},
                     {"heads_dec", c.heads_dec},
                     {"d_head_enc", c.d_head_enc},
                     {"d_head_dec", c.d_head_dec},
                     {"layers_enc", c.layers_enc},
                     {"layers_dec", c.layers_dec},
                     {"dropout", c.dropout},
                     {"mask_ratio", c.mask_ratio},
                     {"num_classes", c.num_classes},
                     {"ln_eps", c.ln_eps}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("name").get_to(c.name);
  j.at("patch_size").get_to(c.patch_size);
  j.at("signal_length").get_to(c.signal_length);
  j.at("d_model_enc").get_to(c.d_model_enc);
  j.at("d_model_dec").get_to(c.d_model_dec);
  j.at("heads_enc").get_to(c.heads_enc);
  j.at("heads_dec").get_to(c.heads_dec);
  j.at("d_head_enc").get_to(c.d_head_enc);
  j.at("d_head_dec").get_to(c.d_head_dec);
  j.at("layers_enc").get_to(c.layers_enc);
  j.at("layers_dec").get_to(c.layers_dec);
  j.at("dropout").get_to(c.dropout);
  j.at("mask_ratio").get_to(c.mask_ratio);
  j.at("num_classes").get_to(c.num_classes);
  j.at("ln_eps").get_to(c.ln_eps);
}

}  // namespace usmae::model

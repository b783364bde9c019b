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
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "usmae/diffcore/tensor.hpp"

namespace usmae::io {

/// Dataset container. Little-endian; 20-byte header followed by
/// fixed-size records of [u16 label] + signal_length bytes.
struct Us1dFile {
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kHeaderSize = 20;
  static constexpr std::uint16_t kMaxLabel = 199;

  std::uint16_t version = kVersion;
  std::uint16_t signal_length = 512;
  std::uint32_t sample_rate_hz = 60'000'000;
  bool has_labels = false;
  std::vector<std::vector<std::uint8_t>> signals;
  std::vector<std::uint16_t> labels;  // one per signal when has_labels

  std::size_t count() const { return signals.size(); }
  std::size_t record_size() const { return signal_length + (has_labels ? 2u : 0u); }

  /// Throws InvalidArgument on ragged records, label/count mismatch or
  /// labels above kMaxLabel.
  void validate() const;
};

std::vector<std::uint8_t> encode_us1d(const Us1dFile& file);

/// Throws CompatibilityError on a bad magic or version and IoError on a
/// truncated or oversized payload.
Us1dFile decode_us1d(std::span<const std::uint8_t> bytes);

Us1dFile read_us1d(const std::filesystem::path& path);
void write_us1d(const std::filesystem::path& path, const Us1dFile& file);

using NamedTensor = std::pair<std::string, diff::Tensor>;

/// Model checkpoint: JSON metadata plus an ordered list of float32 tensors.
struct Checkpoint {
  static constexpr std::uint16_t kVersion = 1;

  nlohmann::json metadata = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const diff::Tensor* find(const std::string& name) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

Checkpoint read_checkpoint(const std::filesystem::path& path);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_bytes_atomic(const std::filesystem::path& path,
                        std::span<const std::uint8_t> bytes);

}  // namespace usmae::io

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

#include "usmae/io/formats.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "usmae/error.hpp"

namespace usmae::io {

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
    }
  }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, const char* what) : in_(in), what_(what) {}

  std::span<const std::uint8_t> bytes(std::size_t n) {
    if (n > in_.size() - pos_) {
      throw IoError(std::string(what_) + ": truncated at byte " + std::to_string(pos_));
    }
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename U>
  U le() {
    const auto b = bytes(sizeof(U));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return static_cast<U>(v);
  }
  float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  const char* what_;
};

void expect_magic(Reader& r, const char (&magic)[5], const char* what) {
  const auto b = r.bytes(4);
  if (std::memcmp(b.data(), magic, 4) != 0) {
    throw CompatibilityError(std::string(what) + ": bad magic, not a " + magic + " file");
  }
}

}  // namespace

void Us1dFile::validate() const {
  if (signal_length == 0) throw InvalidArgument("US1D: signal length must be positive");
  if (signals.size() > UINT32_MAX) throw InvalidArgument("US1D: too many records");
  for (const auto& s : signals) {
    if (s.size() != signal_length) {
      throw InvalidArgument("US1D: record of length " + std::to_string(s.size()) +
                            ", header says " + std::to_string(signal_length));
    }
  }
  if (has_labels) {
    if (labels.size() != signals.size()) {
      throw InvalidArgument("US1D: label count does not match record count");
    }
    for (auto y : labels) {
      if (y > kMaxLabel) {
        throw InvalidArgument("US1D: label " + std::to_string(y) + " exceeds " +
                              std::to_string(kMaxLabel));
      }
    }
  } else if (!labels.empty()) {
    throw InvalidArgument("US1D: labels given but the label flag is clear");
  }
}

std::vector<std::uint8_t> encode_us1d(const Us1dFile& f) {
  f.validate();
  Writer w;
  w.bytes("US1D", 4);
  w.le<std::uint16_t>(f.version);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(f.count()));
  w.le<std::uint16_t>(f.signal_length);
  w.le<std::uint32_t>(f.sample_rate_hz);
  w.le<std::uint8_t>(f.has_labels ? 1 : 0);
  w.le<std::uint8_t>(0);
  w.le<std::uint16_t>(0);
  for (std::size_t i = 0; i < f.count(); ++i) {
    if (f.has_labels) w.le<std::uint16_t>(f.labels[i]);
    w.bytes(f.signals[i].data(), f.signals[i].size());
  }
  return w.take();
}

Us1dFile decode_us1d(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "US1D");
  expect_magic(r, "US1D", "US1D");
  Us1dFile f;
  f.version = r.le<std::uint16_t>();
  if (f.version != Us1dFile::kVersion) {
    throw CompatibilityError("US1D: unsupported version " + std::to_string(f.version));
  }
  const auto count = r.le<std::uint32_t>();
  f.signal_length = r.le<std::uint16_t>();
  f.sample_rate_hz = r.le<std::uint32_t>();
  const auto flags = r.le<std::uint8_t>();
  r.bytes(3);
  if (flags & ~1u) throw CompatibilityError("US1D: unknown flag bits");
  f.has_labels = (flags & 1u) != 0;
  if (f.signal_length == 0) throw IoError("US1D: zero signal length");
  const std::size_t need = static_cast<std::size_t>(count) * f.record_size();
  if (r.remaining() != need) {
    throw IoError("US1D: payload is " + std::to_string(r.remaining()) +
                  " bytes, header implies " + std::to_string(need));
  }
  f.signals.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (f.has_labels) {
      const auto y = r.le<std::uint16_t>();
      if (y > Us1dFile::kMaxLabel) {
        throw IoError("US1D: record " + std::to_string(i) + " has label " +
                      std::to_string(y));
      }
      f.labels.push_back(y);
    }
    const auto s = r.bytes(f.signal_length);
    f.signals.emplace_back(s.begin(), s.end());
  }
  return f;
}

Us1dFile read_us1d(const std::filesystem::path& path) {
  return decode_us1d(read_bytes(path));
}

void write_us1d(const std::filesystem::path& path, const Us1dFile& file) {
  write_bytes_atomic(path, encode_us1d(file));
}

const diff::Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  Writer w;
  w.bytes("UMAE", 4);
  w.le<std::uint16_t>(Checkpoint::kVersion);
  const std::string meta = c.metadata.dump();
  w.le<std::uint32_t>(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta.data(), meta.size());
  w.le<std::uint32_t>(static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& [name, t] : c.tensors) {
    if (name.empty() || name.size() > UINT16_MAX) {
      throw InvalidArgument("checkpoint: bad tensor name '" + name + "'");
    }
    if (t.rank() > UINT8_MAX) throw InvalidArgument("checkpoint: rank too large");
    w.le<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.le<std::uint8_t>(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t e : t.shape()) {
      if (e > UINT32_MAX) throw InvalidArgument("checkpoint: extent too large");
      w.le<std::uint32_t>(static_cast<std::uint32_t>(e));
    }
    for (float v : t.values()) w.f32(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "checkpoint");
  expect_magic(r, "UMAE", "checkpoint");
  const auto version = r.le<std::uint16_t>();
  if (version != Checkpoint::kVersion) {
    throw CompatibilityError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint c;
  const auto meta_len = r.le<std::uint32_t>();
  const auto meta = r.bytes(meta_len);
  try {
    c.metadata = nlohmann::json::parse(meta.begin(), meta.end());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint: bad metadata: ") + e.what());
  }
  const auto count = r.le<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.le<std::uint16_t>();
    const auto nb = r.bytes(name_len);
    std::string name(nb.begin(), nb.end());
    const auto rank = r.le<std::uint8_t>();
    if (rank == 0) throw IoError("checkpoint: tensor '" + name + "' has rank 0");
    diff::Shape shape(rank);
    std::size_t numel = 1;
    for (auto& e : shape) {
      e = r.le<std::uint32_t>();
      if (e == 0) throw IoError("checkpoint: tensor '" + name + "' has a zero extent");
      numel *= e;
      if (numel > r.remaining() / 4) {
        throw IoError("checkpoint: tensor '" + name + "' is truncated");
      }
    }
    std::vector<float> values(numel);
    for (auto& v : values) v = r.f32();
    c.tensors.emplace_back(std::move(name), diff::Tensor(std::move(shape), std::move(values)));
  }
  if (r.remaining() != 0) {
    throw IoError("checkpoint: " + std::to_string(r.remaining()) + " trailing bytes");
  }
  return c;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_bytes(path));
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_bytes_atomic(path, encode_checkpoint(ckpt));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return out;
}

void write_bytes_atomic(const std::filesystem::path& path,
                        std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write error on '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path.string() + "'");
  }
}

}  // namespace usmae::io

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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "usmae/diffcore/tensor.hpp"
#include "usmae/rng.hpp"

namespace usmae::testing {

template <typename T = float>
diff::BasicTensor<T> random_tensor(diff::Shape shape, std::uint64_t seed,
                                   double scale = 1.0) {
  diff::BasicTensor<T> t(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.values()) v = static_cast<T>(scale * rng.normal());
  return t;
}

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "usmae-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace usmae::testing

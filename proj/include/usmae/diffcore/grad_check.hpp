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

#include <cstdint>
#include <functional>
#include <string>

#include "usmae/diffcore/graph.hpp"

namespace usmae::diff {

struct GradCheckOptions {
  double eps = 1e-3;
  // Elements checked per parameter tensor; 0 checks every element.
  std::size_t max_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// Builds a scalar loss on the given graph. Must be deterministic in the
/// parameter values (no dropout).
template <typename T>
using LossFn = std::function<Var(BasicGraph<T>&)>;

/// Compares reverse-mode gradients with central finite differences
/// (f(p+eps) - f(p-eps)) / 2eps. Relative error per element is
/// |a - n| / max(|a|, |n|, 1e-6). Throws NumericError on a non-finite loss.
template <typename T>
GradCheckResult grad_check(const LossFn<T>& loss, BasicParamSet<T>& params,
                           const GradCheckOptions& options = {});

extern template GradCheckResult grad_check<float>(const LossFn<float>&,
                                                  BasicParamSet<float>&,
                                                  const GradCheckOptions&);
extern template GradCheckResult grad_check<double>(const LossFn<double>&,
                                                   BasicParamSet<double>&,
                                                   const GradCheckOptions&);

}  // namespace usmae::diff

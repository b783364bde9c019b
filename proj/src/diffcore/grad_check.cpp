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

#include "usmae/diffcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace usmae::diff {

namespace {

template <typename T>
double evaluate(const LossFn<T>& loss, BasicParamSet<T>& params) {
  BasicGraph<T> g(&params);
  const Var out = loss(g);
  const auto& v = g.value(out);
  if (v.size() != 1) throw DimensionError("grad_check: loss is not a scalar");
  if (!std::isfinite(static_cast<double>(v[0]))) {
    throw NumericError("grad_check: non-finite loss");
  }
  return static_cast<double>(v[0]);
}

}  // namespace

template <typename T>
GradCheckResult grad_check(const LossFn<T>& loss, BasicParamSet<T>& params,
                           const GradCheckOptions& options) {
  params.zero_grad();
  {
    BasicGraph<T> g(&params);
    const Var out = loss(g);
    if (!std::isfinite(static_cast<double>(g.value(out)[0]))) {
      throw NumericError("grad_check: non-finite loss");
    }
    g.backward(out);
  }

  GradCheckResult result;
  Rng rng(options.seed);
  const T eps = static_cast<T>(options.eps);
  for (std::size_t p = 0; p < params.size(); ++p) {
    const std::size_t n = params[p].value.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (options.max_per_param != 0 && options.max_per_param < n) {
      rng.shuffle(std::span<std::size_t>(order));
      order.resize(options.max_per_param);
      std::sort(order.begin(), order.end());
    }
    for (std::size_t i : order) {
      T& slot = params[p].value[i];
      const T saved = slot;
      slot = saved + eps;
      const double plus = evaluate(loss, params);
      slot = saved - eps;
      const double minus = evaluate(loss, params);
      slot = saved;
      // Use the perturbation actually applied after rounding to T.
      const double step = static_cast<double>((saved + eps) - (saved - eps));
      const double numeric = (plus - minus) / step;
      const double analytic = static_cast<double>(params[p].grad[i]);
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.checked;
      if (result.worst_param.empty() || rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = params[p].name;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

template GradCheckResult grad_check<float>(const LossFn<float>&,
                                           BasicParamSet<float>&,
                                           const GradCheckOptions&);
template GradCheckResult grad_check<double>(const LossFn<double>&,
                                            BasicParamSet<double>&,
                                            const GradCheckOptions&);

}  // namespace usmae::diff

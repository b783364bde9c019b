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
#include <vector>

#include "usmae/diffcore/param_set.hpp"

namespace usmae::training {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;

  void validate() const;
};

/// First and second moments per parameter, in ParamSet order.
struct OptimState {
  AdamWConfig hp;
  std::uint64_t step = 0;
  std::vector<diff::Tensor> m;
  std::vector<diff::Tensor> v;
};

OptimState make_optim_state(const diff::ParamSet& params, const AdamWConfig& hp = {});

/// Throws CompatibilityError unless the moments match the parameter shapes.
void check_optim_state(const diff::ParamSet& params, const OptimState& state);

/// One bias-corrected AdamW update from the gradients stored in `params`:
///   theta -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta).
/// Throws NumericError naming the first non-finite gradient; nothing is
/// modified in that case.
void adamw_step(diff::ParamSet& params, OptimState& state, double lr);

double global_grad_norm(const diff::ParamSet& params);

/// Rescales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(diff::ParamSet& params, double max_norm);

/// Linear warmup then cosine decay to zero.
struct Schedule {
  double base_lr = 1e-3;
  double warmup_fraction = 0.15;
  std::size_t total_steps = 1;

  std::size_t warmup_steps() const;
  void validate() const;
};

/// Learning rate at `step` in [0, total_steps]; throws InvalidArgument
/// outside that range.
double lr_at(std::size_t step, const Schedule& schedule);

}  // namespace usmae::training

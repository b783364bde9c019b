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

#include "usmae/training/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "usmae/error.hpp"

namespace usmae::training {

void AdamWConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("AdamW betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw InvalidArgument("AdamW eps must be positive");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("weight decay must be non-negative");
}

OptimState make_optim_state(const diff::ParamSet& params, const AdamWConfig& hp) {
  hp.validate();
  OptimState s;
  s.hp = hp;
  for (const auto& e : params) {
    s.m.emplace_back(e.value.shape());
    s.v.emplace_back(e.value.shape());
  }
  return s;
}

void check_optim_state(const diff::ParamSet& params, const OptimState& state) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw CompatibilityError("optimizer state covers " + std::to_string(state.m.size()) +
                             " tensors, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.m[i].shape() != params[i].value.shape() ||
        state.v[i].shape() != params[i].value.shape()) {
      throw CompatibilityError("optimizer moments of '" + params[i].name +
                               "' do not match the parameter shape");
    }
  }
}

void adamw_step(diff::ParamSet& params, OptimState& state, double lr) {
  check_optim_state(params, state);
  for (const auto& e : params) {
    const auto g = e.grad.values();
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!std::isfinite(g[j])) {
        throw NumericError("non-finite gradient in '" + e.name + "' at element " +
                           std::to_string(j) + " (step " + std::to_string(state.step) + ")");
      }
    }
  }
  const auto& hp = state.hp;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(hp.beta1, t);
  const double bc2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].value.values();
    const auto g = params[i].grad.values();
    auto m = state.m[i].values();
    auto v = state.v[i].values();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double gj = g[j];
      m[j] = static_cast<float>(hp.beta1 * m[j] + (1.0 - hp.beta1) * gj);
      v[j] = static_cast<float>(hp.beta2 * v[j] + (1.0 - hp.beta2) * gj * gj);
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      const double th = theta[j];
      theta[j] = static_cast<float>(
          th - lr * (m_hat / (std::sqrt(v_hat) + hp.eps) + hp.weight_decay * th));
    }
  }
}

double global_grad_norm(const diff::ParamSet& params) {
  double ss = 0.0;
  for (const auto& e : params) {
    for (float g : e.grad.values()) ss += static_cast<double>(g) * g;
  }
  return std::sqrt(ss);
}

double clip_grad_norm(diff::ParamSet& params, double max_norm) {
  if (!(max_norm > 0.0)) throw InvalidArgument("clip norm must be positive");
  const double norm = global_grad_norm(params);
  if (norm > max_norm) {
    const auto s = static_cast<float>(max_norm / norm);
    for (auto& e : params) {
      for (float& g : e.grad.values()) g *= s;
    }
  }
  return norm;
}

std::size_t Schedule::warmup_steps() const {
  return static_cast<std::size_t>(std::floor(warmup_fraction * static_cast<double>(total_steps)));
}

void Schedule::validate() const {
  if (!(base_lr > 0.0)) throw InvalidArgument("base learning rate must be positive");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw InvalidArgument("warmup fraction must lie in [0, 1)");
  }
  if (total_steps == 0) throw InvalidArgument("schedule needs at least one step");
}

double lr_at(std::size_t step, const Schedule& s) {
  s.validate();
  if (step > s.total_steps) {
    throw InvalidArgument("step " + std::to_string(step) + " beyond the schedule's " +
                          std::to_string(s.total_steps) + " steps");
  }
  const std::size_t w = s.warmup_steps();
  if (step < w) {
    return s.base_lr * static_cast<double>(step) / static_cast<double>(w);
  }
  const double progress =
      static_cast<double>(step - w) / static_cast<double>(s.total_steps - w);
  return s.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace usmae::training

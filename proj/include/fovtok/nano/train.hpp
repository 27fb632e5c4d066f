/* Copyright 2026 The fovtok Authors. All Rights Reserved.

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

#ifndef FOVTOK_NANO_TRAIN_HPP
#define FOVTOK_NANO_TRAIN_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fovtok/autodiff.hpp"
#include "fovtok/error.hpp"
#include "fovtok/losses.hpp"
#include "fovtok/nano/model.hpp"

namespace fovtok::nano {

/// Evaluates `f` on a taped copy of `theta`; fills `grad` and returns f(theta).
template <typename F>
double value_and_grad(const std::vector<double>& theta, F&& f, std::vector<double>& grad) {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  std::vector<ad::Var> vars;
  vars.reserve(theta.size());
  for (double v : theta) vars.push_back(ad::Var::variable(v));
  const ad::Var out = f(vars);
  const auto adj = tape.gradient(out.id);
  grad.resize(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) grad[i] = adj[vars[i].id];
  return out.value;
}

struct AdamW {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.001;
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  void apply(std::vector<double>& theta, const std::vector<double>& grad, double lr) {
    if (grad.size() != theta.size()) throw InputError("gradient size mismatch");
    if (m.empty()) {
      m.assign(theta.size(), 0.0);
      v.assign(theta.size(), 0.0);
    }
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      theta[i] -= lr * ((m[i] / c1) / (std::sqrt(v[i] / c2) + eps) + weight_decay * theta[i]);
    }
  }
};

/// Hyperparameters of a training run. Only the schema and the step-indexed
/// learning-rate and batch-size rules are provided; no large-scale runs.
struct TrainingSchedule {
  std::string name;
  double base_lr = 0.0;
  std::int64_t warmup_steps = 0;
  std::int64_t batch_size = 1;
  std::int64_t batch_doubling_steps = 0;  // 0 disables doubling
  std::int64_t total_steps = 0;
  double weight_decay = 0.001;
  double mask_ratio = 0.0;        // MAE only
  int views_per_image = 1;        // MAE only
  int max_prompts_per_image = 1;  // segmentation only
  int fixation_margin = 0;        // px kept clear of the image border when sampling fixations
  LossWeights loss_weights{};

  /// Linear warmup from 0, then constant.
  double learning_rate(std::int64_t step) const {
    if (step < 0) throw InputError("negative step");
    if (warmup_steps > 0 && step < warmup_steps) return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
    return base_lr;
  }

  std::int64_t batch_size_at(std::int64_t step) const {
    if (batch_doubling_steps <= 0) return batch_size;
    const auto doublings = step / batch_doubling_steps;
    return batch_size << std::min<std::int64_t>(doublings, 20);
  }

  static TrainingSchedule mae() {
    TrainingSchedule s;
    s.name = "mae";
    s.base_lr = std::ldexp(1.0, -13);
    s.warmup_steps = 10'000;
    s.batch_size = 1024;
    s.batch_doubling_steps = 100'000;
    s.total_steps = 500'000;
    s.mask_ratio = 0.75;
    s.views_per_image = 2;
    s.fixation_margin = 256;
    return s;
  }

  static TrainingSchedule segmentation() {
    TrainingSchedule s;
    s.name = "segmentation";
    s.base_lr = std::ldexp(1.0, -16);
    s.warmup_steps = 5'000;
    s.batch_size = 2048;
    s.batch_doubling_steps = 50'000;
    s.total_steps = 250'000;
    s.max_prompts_per_image = 16;
    s.fixation_margin = 256;
    return s;
  }
};

inline void to_json(nlohmann::json& j, const TrainingSchedule& s) {
  j = {{"name", s.name},
       {"base_lr", s.base_lr},
       {"warmup_steps", s.warmup_steps},
       {"batch_size", s.batch_size},
       {"batch_doubling_steps", s.batch_doubling_steps},
       {"total_steps", s.total_steps},
       {"weight_decay", s.weight_decay},
       {"mask_ratio", s.mask_ratio},
       {"views_per_image", s.views_per_image},
       {"max_prompts_per_image", s.max_prompts_per_image},
       {"fixation_margin", s.fixation_margin},
       {"loss_weights", {{"focal", s.loss_weights.focal}, {"dice", s.loss_weights.dice}, {"iou", s.loss_weights.iou}}}};
}

inline void from_json(const nlohmann::json& j, TrainingSchedule& s) {
  j.at("name").get_to(s.name);
  j.at("base_lr").get_to(s.base_lr);
  j.at("warmup_steps").get_to(s.warmup_steps);
  j.at("batch_size").get_to(s.batch_size);
  j.at("batch_doubling_steps").get_to(s.batch_doubling_steps);
  j.at("total_steps").get_to(s.total_steps);
  j.at("weight_decay").get_to(s.weight_decay);
  j.at("mask_ratio").get_to(s.mask_ratio);
  j.at("views_per_image").get_to(s.views_per_image);
  j.at("max_prompts_per_image").get_to(s.max_prompts_per_image);
  j.at("fixation_margin").get_to(s.fixation_margin);
  const auto& w = j.at("loss_weights");
  w.at("focal").get_to(s.loss_weights.focal);
  w.at("dice").get_to(s.loss_weights.dice);
  w.at("iou").get_to(s.loss_weights.iou);
}

struct StepResult {
  double loss = 0.0;           // combined loss before the update
  double selected_loss = 0.0;  // focal/dice loss of the selected mask
  std::size_t best_index = 0;
};

/// One optimizer step on a single (tokens, target) example.
inline StepResult segmentation_step(const NanoNet& net, std::vector<double>& theta, AdamW& opt,
                                    const TokenTensor& tokens, const FoveatedMask& target, double lr,
                                    const LossWeights& weights = {}) {
  StepResult r;
  std::vector<double> grad;
  r.loss = value_and_grad(theta, [&](const std::vector<ad::Var>& p) {
    const auto l = net.loss(p, tokens, target, weights);
    r.best_index = l.best_index;
    r.selected_loss = l.mask_losses[l.best_index].value;
    return l.total;
  }, grad);
  opt.apply(theta, grad, lr);
  return r;
}

}  // namespace fovtok::nano

#endif  // FOVTOK_NANO_TRAIN_HPP

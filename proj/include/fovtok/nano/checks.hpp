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

// Numeric self-checks of the nano network: finite-difference gradients,
// out-of-image token invariance and single-example overfitting.

#ifndef FOVTOK_NANO_CHECKS_HPP
#define FOVTOK_NANO_CHECKS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "fovtok/error.hpp"
#include "fovtok/image.hpp"
#include "fovtok/nano/model.hpp"
#include "fovtok/nano/train.hpp"
#include "fovtok/tokenizer.hpp"

namespace fovtok::nano {

/// Four tokens of one 2x2 stride-1 level, eight-wide model.
inline NanoConfig tiny_config(std::uint64_t seed = 0) {
  NanoConfig c;
  c.pattern = FoveationPattern{16, {{1, 2}}};
  c.channels = 1;
  c.d_model = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.d_ff = 16;
  c.n_masks = 3;
  c.decoder_depth = 1;
  c.decoder_heads = 2;
  c.decoder_mlp = 16;
  c.init_std = 0.3;
  c.seed = seed;
  return c;
}

struct Example {
  TokenTensor tokens;
  FoveatedMask target;
};

/// Random image with a disk-shaped segment around the prompt.
inline Example synthetic_example(const FoveationPattern& pattern, int channels, int width, int height, Point prompt,
                                 double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  ImageU8 img(width, height, channels);
  ImageU8 mask(width, height, 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - prompt.x;
      const double dy = y - prompt.y;
      const bool inside = dx * dx + dy * dy <= radius * radius;
      mask(x, y) = inside ? 1 : 0;
      for (int c = 0; c < channels; ++c) img(x, y, c) = static_cast<std::uint8_t>(inside ? 160 + byte(rng) / 4 : byte(rng) / 4);
    }
  }
  return {tokenize(img, prompt, pattern), downsample_mask(mask, prompt, pattern)};
}

inline Example tiny_example(const NanoConfig& cfg, std::uint64_t seed) {
  const int side = pattern_size(cfg.pattern);
  return synthetic_example(cfg.pattern, cfg.channels, side + 8, side + 4, {side / 2 + 3, side / 2 + 1}, side / 4.0, seed);
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::string worst_param;
  double max_abs_error = 0.0;
  std::size_t params = 0;
  double loss = 0.0;
};

// Below this magnitude a gradient is compared in absolute terms: with
// eps = 1e-4 the loss's summation roundoff alone gives ~1e-10 of
// finite-difference noise.
inline constexpr double kGradCheckFloor = 1e-5;

inline double relative_error(double a, double b, double floor = kGradCheckFloor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Central difference of f along coordinate i.
template <typename F>
double central_difference(F&& f, std::vector<double> theta, std::size_t i, double eps) {
  const double x = theta[i];
  theta[i] = x + eps;
  const double up = f(theta);
  theta[i] = x - eps;
  const double down = f(theta);
  return (up - down) / (2.0 * eps);
}

/// Analytic gradient of the combined segmentation loss against central
/// differences on every parameter. Relative error uses max(|a|, |n|, floor)
/// as the denominator. The
/// mask selected at theta is held fixed while differencing, so a near-tie in
/// the argmin cannot put the two probes on different branches.
inline GradCheckResult grad_check(const NanoConfig& cfg, const Example& ex, double eps = 1e-4) {
  NanoModel model(cfg);
  const auto& net = model.net();
  const auto& theta = model.params();
  std::vector<double> grad;
  GradCheckResult r;
  r.params = theta.size();
  std::size_t best = 0;
  r.loss = value_and_grad(theta, [&](const std::vector<ad::Var>& p) {
    const auto l = net.loss(p, ex.tokens, ex.target);
    best = l.best_index;
    return l.total;
  }, grad);
  auto f = [&](const std::vector<double>& p) { return net.loss(p, ex.tokens, ex.target, {}, best).total; };
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double n = central_difference(f, theta, i, eps);
    if (!std::isfinite(n) || !std::isfinite(grad[i])) throw Error("non-finite gradient at " + net.layout().owner(i));
    r.max_abs_error = std::max(r.max_abs_error, std::abs(grad[i] - n));
    const double e = relative_error(grad[i], n);
    if (e > r.max_rel_error) {
      r.max_rel_error = e;
      r.worst_index = i;
    }
  }
  r.worst_param = net.layout().owner(r.worst_index);
  return r;
}

inline GradCheckResult grad_check(std::uint64_t seed, double eps = 1e-4) {
  const auto cfg = tiny_config(seed);
  return grad_check(cfg, tiny_example(cfg, seed), eps);
}

struct InvarianceResult {
  int trials = 0;
  int failures = 0;
  std::size_t invalid_tokens = 0;  // summed over trials
  std::size_t compared_values = 0;
};

inline bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

/// Overwrites the samples of every invalid token with noise and checks that
/// encoder features of valid tokens, mask logits of valid tokens and IoU
/// predictions are bit-identical.
inline InvarianceResult invariance_check(std::uint64_t seed, int trials = 20) {
  InvarianceResult r;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = seed * 1000 + static_cast<std::uint64_t>(t);
    std::mt19937_64 rng(s);
    NanoConfig cfg;
    cfg.d_model = 16;
    cfg.n_heads = 4;
    cfg.d_ff = 32;
    cfg.decoder_heads = 4;
    cfg.decoder_mlp = 32;
    cfg.init_std = 0.1;
    cfg.seed = s;
    NanoModel model(cfg);

    std::uniform_int_distribution<int> dim(200, 400);
    const int w = dim(rng);
    const int h = dim(rng);
    std::uniform_int_distribution<int> near(0, 15);
    const Point prompt{(t % 2) ? w - 1 - near(rng) : near(rng), (t / 2 % 2) ? h - 1 - near(rng) : near(rng)};
    const auto ex = synthetic_example(cfg.pattern, cfg.channels, w, h, prompt, 20.0, s);

    TokenTensor mutated = ex.tokens;
    std::uniform_real_distribution<double> noise(-1000.0, 1000.0);
    const std::size_t per = mutated.token_stride();
    for (std::size_t k = 0; k < mutated.token_count(); ++k) {
      if (mutated.valid[k]) continue;
      ++r.invalid_tokens;
      for (std::size_t i = 0; i < per; ++i) mutated.data[k * per + i] = noise(rng);
    }

    const auto& net = model.net();
    const auto ea = net.encode(model.params(), ex.tokens);
    const auto eb = net.encode(model.params(), mutated);
    const auto a = net.decode(model.params(), ea, ex.tokens.valid);
    const auto b = net.decode(model.params(), eb, mutated.valid);

    bool ok = true;
    auto cmp = [&](double x, double y) {
      ++r.compared_values;
      ok = ok && same_bits(x, y);
    };
    cmp(ea.features(0, 0), eb.features(0, 0));
    for (std::size_t k = 0; k < ex.tokens.token_count(); ++k) {
      if (!ex.tokens.valid[k]) continue;
      const int row = static_cast<int>(k) + 1;
      for (int c = 0; c < ea.features.cols; ++c) cmp(ea.features(row, c), eb.features(row, c));
    }
    for (std::size_t m = 0; m < a.mask_logits.size(); ++m) {
      for (std::size_t k = 0; k < ex.tokens.token_count(); ++k) {
        if (!ex.tokens.valid[k]) continue;
        const std::size_t per_mask = a.mask_logits[m].size() / ex.tokens.token_count();
        for (std::size_t i = 0; i < per_mask; ++i) cmp(a.mask_logits[m][k * per_mask + i], b.mask_logits[m][k * per_mask + i]);
      }
    }
    for (std::size_t i = 0; i < a.iou_pred.size(); ++i) cmp(a.iou_pred[i], b.iou_pred[i]);
    ++r.trials;
    if (!ok) ++r.failures;
  }
  return r;
}

struct OverfitResult {
  int steps = 0;
  int decreases = 0;
  double first_loss = 0.0;
  double last_loss = 0.0;
  std::vector<double> losses;
};

inline constexpr double kOverfitLearningRate = 1e-3;

/// AdamW on a single example; counts steps whose loss is strictly below the
/// previous step's.
inline OverfitResult overfit_check(std::uint64_t seed, int steps = 100, double lr = kOverfitLearningRate) {
  const auto cfg = tiny_config(seed);
  const auto ex = tiny_example(cfg, seed);
  NanoModel model(cfg);
  AdamW opt;
  OverfitResult r;
  r.steps = steps;
  for (int i = 0; i <= steps; ++i) {
    std::vector<double> grad;
    const double loss = value_and_grad(model.params(), [&](const std::vector<ad::Var>& p) {
      return model.net().loss(p, ex.tokens, ex.target).total;
    }, grad);
    r.losses.push_back(loss);
    if (i > 0 && loss < r.losses[static_cast<std::size_t>(i) - 1]) ++r.decreases;
    if (i < steps) opt.apply(model.params(), grad, lr);
  }
  r.first_loss = r.losses.front();
  r.last_loss = r.losses.back();
  return r;
}

}  // namespace fovtok::nano

#endif  // FOVTOK_NANO_CHECKS_HPP

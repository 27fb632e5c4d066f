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

// Losses on foveated maps with continuous targets.
//
// Each sample k carries a weight w_k equal to the area of its receptive
// field (stride squared), zero for samples of invalid tokens. The kernels are
// templates over the scalar type so the same code runs in the training path
// under ad::Var. Targets are always plain doubles.

#ifndef FOVTOK_LOSSES_HPP
#define FOVTOK_LOSSES_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "fovtok/autodiff.hpp"
#include "fovtok/error.hpp"
#include "fovtok/tokenizer.hpp"

namespace fovtok {

struct LossWeights {
  double focal = 20.0;
  double dice = 1.0;
  double iou = 0.01;
};

inline constexpr double kLogFloor = 1e-12;
inline constexpr double kDiceSmooth = 1.0;

namespace detail {

template <typename T>
T floored_log(const T& x) {
  using std::log;
  if (value_of(x) < kLogFloor) return T(std::log(kLogFloor));
  return log(x);
}

inline void check_sizes(std::size_t p, std::size_t q, std::size_t w) {
  if (p != q || p != w) throw InputError("loss operands differ in size");
}

}  // namespace detail

/// Expected intersection over expected union, area weighted. 1 when both
/// maps are empty.
template <typename T>
T expected_iou(std::span<const T> p, std::span<const double> q, std::span<const double> w) {
  detail::check_sizes(p.size(), q.size(), w.size());
  std::vector<T> inter;
  std::vector<T> uni;
  inter.reserve(p.size());
  uni.reserve(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (w[k] == 0.0) continue;
    // 1 - (1-p)(1-q) = p + q - pq
    inter.push_back(p[k] * (w[k] * q[k]));
    uni.push_back(p[k] * (w[k] * (1.0 - q[k])) + w[k] * q[k]);
  }
  const T num = sum_of<T>(inter);
  const T den = sum_of<T>(uni);
  if (value_of(den) == 0.0) return T(1.0);
  return num / den;
}

/// Weighted mean of the two-sided focal term, extended to soft targets.
template <typename T>
T focal_loss(std::span<const T> p, std::span<const double> q, std::span<const double> w, double gamma = 2.0) {
  detail::check_sizes(p.size(), q.size(), w.size());
  using std::pow;
  std::vector<T> terms;
  terms.reserve(p.size());
  double wsum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (w[k] == 0.0) continue;
    wsum += w[k];
    const T one_minus = 1.0 - p[k];
    T term = T(0.0);
    if (q[k] != 0.0) term = term + (q[k] * w[k]) * pow(one_minus, gamma) * detail::floored_log(p[k]);
    if (q[k] != 1.0) term = term + ((1.0 - q[k]) * w[k]) * pow(p[k], gamma) * detail::floored_log(one_minus);
    terms.push_back(term);
  }
  if (wsum == 0.0) return T(0.0);
  return -sum_of<T>(terms) / wsum;
}

template <typename T>
T dice_loss(std::span<const T> p, std::span<const double> q, std::span<const double> w) {
  detail::check_sizes(p.size(), q.size(), w.size());
  std::vector<T> inter;
  std::vector<T> mass;
  inter.reserve(p.size());
  mass.reserve(p.size());
  double target_mass = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (w[k] == 0.0) continue;
    inter.push_back(p[k] * (2.0 * w[k] * q[k]));
    mass.push_back(p[k] * w[k]);
    target_mass += w[k] * q[k];
  }
  const T num = sum_of<T>(inter) + kDiceSmooth;
  const T den = sum_of<T>(mass) + (target_mass + kDiceSmooth);
  return 1.0 - num / den;
}

template <typename T>
struct CombinedLoss {
  T total{};
  std::size_t best_index = 0;
  std::vector<T> mask_losses;  // focal * w_f + dice * w_d per mask
  T iou_loss{};                // w_iou * sum of squared IoU errors
};

/// Min-over-masks segmentation loss plus IoU-prediction regression on every
/// mask. Ties in the per-mask loss go to the lowest index.
template <typename T>
CombinedLoss<T> combined_loss(const std::vector<std::vector<T>>& masks, std::span<const T> iou_pred,
                              std::span<const double> target, std::span<const double> w,
                              const LossWeights& weights = {}, double gamma = 2.0) {
  if (masks.empty()) throw InputError("combined loss needs at least one mask");
  if (iou_pred.size() != masks.size()) throw InputError("one IoU prediction per mask required");
  CombinedLoss<T> out;
  std::vector<T> iou_terms;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const std::span<const T> p(masks[i]);
    out.mask_losses.push_back(weights.focal * focal_loss<T>(p, target, w, gamma) +
                              weights.dice * dice_loss<T>(p, target, w));
    const T err = iou_pred[i] - expected_iou<T>(p, target, w);
    iou_terms.push_back(err * err);
  }
  for (std::size_t i = 1; i < out.mask_losses.size(); ++i) {
    if (value_of(out.mask_losses[i]) < value_of(out.mask_losses[out.best_index])) out.best_index = i;
  }
  out.iou_loss = weights.iou * sum_of<T>(iou_terms);
  out.total = out.mask_losses[out.best_index] + out.iou_loss;
  return out;
}

// ---------------------------------------------------------------------------
// FoveatedMask front ends. `p` holds probabilities, `q` targets.

namespace detail {

inline std::vector<double> mask_weights(const FoveatedMask& p, const FoveatedMask& q) {
  if (!(p.pattern == q.pattern)) throw InputError("pattern mismatch");
  if (p.valid != q.valid) throw InputError("validity mismatch");
  if (p.data.size() != q.data.size() || p.data.size() != p.token_count() * p.token_stride()) {
    throw InputError("foveated mask size mismatch");
  }
  auto w = sample_areas(p.pattern);
  const std::size_t per = p.token_stride();
  for (std::size_t k = 0; k < p.token_count(); ++k) {
    if (!p.valid[k]) std::fill(w.begin() + static_cast<std::ptrdiff_t>(k * per),
                               w.begin() + static_cast<std::ptrdiff_t>((k + 1) * per), 0.0);
  }
  return w;
}

}  // namespace detail

inline double expected_iou(const FoveatedMask& p, const FoveatedMask& q) {
  const auto w = detail::mask_weights(p, q);
  return expected_iou<double>(p.data, q.data, w);
}

inline double focal_loss(const FoveatedMask& p, const FoveatedMask& q, double gamma = 2.0) {
  const auto w = detail::mask_weights(p, q);
  return focal_loss<double>(p.data, q.data, w, gamma);
}

inline double dice_loss(const FoveatedMask& p, const FoveatedMask& q) {
  const auto w = detail::mask_weights(p, q);
  return dice_loss<double>(p.data, q.data, w);
}

inline CombinedLoss<double> combined_loss(const std::vector<FoveatedMask>& masks, std::span<const double> ious,
                                          const FoveatedMask& target, const LossWeights& weights = {}) {
  if (masks.empty()) throw InputError("combined loss needs at least one mask");
  const auto w = detail::mask_weights(masks.front(), target);
  std::vector<std::vector<double>> probs;
  for (const auto& m : masks) {
    detail::mask_weights(m, target);
    probs.push_back(m.data);
  }
  return combined_loss<double>(probs, ious, target.data, w, weights);
}

}  // namespace fovtok

#endif  // FOVTOK_LOSSES_HPP

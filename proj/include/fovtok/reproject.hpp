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

#ifndef FOVTOK_REPROJECT_HPP
#define FOVTOK_REPROJECT_HPP

#include <algorithm>
#include <cmath>

#include "fovtok/error.hpp"
#include "fovtok/image.hpp"
#include "fovtok/tokenizer.hpp"

namespace fovtok {

/// Foveated map back to full image resolution. Every token is interpolated
/// over its receptive rectangle; image pixels outside the crop get 0.
inline ImageF reproject_mask(const FoveatedMask& fmask, const Placement& placement,
                             Interp mode = Interp::kBilinear) {
  if (pattern_size(fmask.pattern) != placement.side) throw InputError("placement does not match mask pattern");
  const ImageF crop = render_mask(fmask, mode);
  ImageF out(placement.image_width, placement.image_height, 1);
  const int x0 = std::max(0, placement.origin_x);
  const int y0 = std::max(0, placement.origin_y);
  const int x1 = std::min(placement.image_width, placement.origin_x + placement.side);
  const int y1 = std::min(placement.image_height, placement.origin_y + placement.side);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) out(x, y) = crop(x - placement.origin_x, y - placement.origin_y);
  return out;
}

/// Element-wise logistic function, applied to a map of logits.
inline FoveatedMask sigmoid(FoveatedMask m) {
  for (std::size_t k = 0; k < m.token_count(); ++k) {
    const std::size_t per = m.token_stride();
    for (std::size_t i = 0; i < per; ++i) {
      double& v = m.data[k * per + i];
      v = m.valid[k] ? 1.0 / (1.0 + std::exp(-v)) : 0.0;
    }
  }
  return m;
}

/// Binary IoU of `pred > threshold` against a nonzero-is-positive mask.
/// Returns 1 when both are empty.
inline double binary_iou(const ImageF& pred, const ImageU8& gt, double threshold = 0.5) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) throw InputError("IoU dimension mismatch");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      const bool a = pred(x, y) > threshold;
      const bool b = gt(x, y, 0) != 0;
      inter += (a && b) ? 1 : 0;
      uni += (a || b) ? 1 : 0;
    }
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace fovtok

#endif  // FOVTOK_REPROJECT_HPP

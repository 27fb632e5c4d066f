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

// Foveated tokenization: crop a pattern-sized square around the prompt,
// box-filter every patch down to patch_size x patch_size samples and stack
// them. The crop is never materialized; every sample is read from an
// integral image of the source with out-of-image pixels counting as zero.

#ifndef FOVTOK_TOKENIZER_HPP
#define FOVTOK_TOKENIZER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fovtok/error.hpp"
#include "fovtok/image.hpp"
#include "fovtok/integral_image.hpp"
#include "fovtok/pattern.hpp"

namespace fovtok {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Where a crop sits relative to its source image. Crop pixel (u, v) is image
/// pixel (origin_x + u, origin_y + v).
struct Placement {
  int origin_x = 0;
  int origin_y = 0;
  int side = 0;
  int image_width = 0;
  int image_height = 0;

  int pad_left() const { return std::max(0, -origin_x); }
  int pad_top() const { return std::max(0, -origin_y); }
  int pad_right() const { return std::max(0, origin_x + side - image_width); }
  int pad_bottom() const { return std::max(0, origin_y + side - image_height); }
  bool needs_padding() const { return pad_left() + pad_top() + pad_right() + pad_bottom() > 0; }

  /// Crop-space rectangle translated into image coordinates (not clipped).
  Rect to_image(const Rect& r) const { return {r.x + origin_x, r.y + origin_y, r.w, r.h}; }

  /// True when any pixel of the crop-space rectangle lies inside the image.
  bool overlaps_image(const Rect& r) const {
    const Rect ir = to_image(r);
    return ir.x < image_width && ir.y < image_height && ir.right() > 0 && ir.bottom() > 0;
  }

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// The prompt pixel lands on crop-local (side/2, side/2).
inline Placement make_placement(int image_width, int image_height, Point prompt,
                                const FoveationPattern& pattern) {
  if (prompt.x < 0 || prompt.y < 0 || prompt.x >= image_width || prompt.y >= image_height) {
    throw InputError("prompt outside image");
  }
  const int side = pattern_size(pattern);
  return {prompt.x - side / 2, prompt.y - side / 2, side, image_width, image_height};
}

template <typename T>
struct Crop {
  Image<T> image;
  Placement placement;
};

/// Explicit side x side crop with zero padding.
template <typename T>
Crop<T> crop_with_padding(const Image<T>& image, Point prompt, const FoveationPattern& pattern) {
  Crop<T> out;
  out.placement = make_placement(image.width(), image.height(), prompt, pattern);
  const auto& pl = out.placement;
  out.image = Image<T>(pl.side, pl.side, image.channels());
  for (int v = 0; v < pl.side; ++v) {
    const int y = pl.origin_y + v;
    if (y < 0 || y >= image.height()) continue;
    for (int u = 0; u < pl.side; ++u) {
      const int x = pl.origin_x + u;
      if (x < 0 || x >= image.width()) continue;
      for (int c = 0; c < image.channels(); ++c) out.image(u, v, c) = image(x, y, c);
    }
  }
  return out;
}

/// N tokens of T x T x C samples (token-major, row-major, channel-interleaved)
/// plus validity flags. Samples are block means in source units.
struct TokenTensor {
  FoveationPattern pattern;
  int channels = 1;
  std::vector<double> data;
  std::vector<std::uint8_t> valid;

  std::size_t token_count() const { return valid.size(); }
  int patch_size() const { return pattern.patch_size; }
  std::size_t token_stride() const {
    return static_cast<std::size_t>(pattern.patch_size) * pattern.patch_size * channels;
  }
  std::span<const double> token(std::size_t k) const {
    return {data.data() + k * token_stride(), token_stride()};
  }
  std::span<double> token(std::size_t k) { return {data.data() + k * token_stride(), token_stride()}; }
  double& at(std::size_t k, int row, int col, int c = 0) {
    return data[k * token_stride() + (static_cast<std::size_t>(row) * pattern.patch_size + col) * channels + c];
  }
  double at(std::size_t k, int row, int col, int c = 0) const {
    return data[k * token_stride() + (static_cast<std::size_t>(row) * pattern.patch_size + col) * channels + c];
  }
  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
  }

  friend bool operator==(const TokenTensor&, const TokenTensor&) = default;
};

/// Per-token T x T real map in foveated space. Holds targets in [0, 1] or,
/// for model outputs, logits.
struct FoveatedMask {
  FoveationPattern pattern;
  std::vector<double> data;
  std::vector<std::uint8_t> valid;

  std::size_t token_count() const { return valid.size(); }
  std::size_t token_stride() const {
    return static_cast<std::size_t>(pattern.patch_size) * pattern.patch_size;
  }
  double& at(std::size_t k, int row, int col) {
    return data[k * token_stride() + static_cast<std::size_t>(row) * pattern.patch_size + col];
  }
  double at(std::size_t k, int row, int col) const {
    return data[k * token_stride() + static_cast<std::size_t>(row) * pattern.patch_size + col];
  }

  friend bool operator==(const FoveatedMask&, const FoveatedMask&) = default;
};

inline FoveatedMask make_foveated_mask(const FoveationPattern& pattern, std::vector<std::uint8_t> valid,
                                       double fill = 0.0) {
  FoveatedMask m;
  m.pattern = pattern;
  m.valid = std::move(valid);
  m.data.assign(m.valid.size() * m.token_stride(), fill);
  return m;
}

/// Receptive-field area (stride squared) of every sample, token-major.
inline std::vector<double> sample_areas(const FoveationPattern& pattern) {
  const auto patches = enumerate_patches(pattern);
  const std::size_t per = static_cast<std::size_t>(pattern.patch_size) * pattern.patch_size;
  std::vector<double> w;
  w.reserve(patches.size() * per);
  for (const auto& p : patches) w.insert(w.end(), per, static_cast<double>(p.stride) * p.stride);
  return w;
}

namespace detail {

/// Shared box-filter pass; `emit(k, row, col, c, sum, area)` receives exact
/// block sums.
template <typename Integral, typename Emit>
void box_filter_patches(const Integral& ii, const Placement& pl, const std::vector<PatchSpec>& patches,
                        int patch_size, std::vector<std::uint8_t>& valid, Emit&& emit) {
  valid.assign(patches.size(), 0);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto& p = patches[k];
    if (!pl.overlaps_image(p.rect)) continue;
    valid[k] = 1;
    const Rect r = pl.to_image(p.rect);
    const int s = p.stride;
    for (int row = 0; row < patch_size; ++row) {
      const int y0 = r.y + row * s;
      for (int col = 0; col < patch_size; ++col) {
        const int x0 = r.x + col * s;
        for (int c = 0; c < ii.channels(); ++c) {
          emit(k, row, col, c, ii.rect_sum(x0, y0, x0 + s, y0 + s, c), s * s);
        }
      }
    }
  }
}

}  // namespace detail

template <typename T>
TokenTensor tokenize(const Image<T>& image, Point prompt, const FoveationPattern& pattern) {
  const Placement pl = make_placement(image.width(), image.height(), prompt, pattern);
  const auto patches = enumerate_patches(pattern);
  const auto ii = integral_image(image);

  TokenTensor out;
  out.pattern = pattern;
  out.channels = image.channels();
  out.data.assign(patches.size() * out.token_stride(), 0.0);
  detail::box_filter_patches(ii, pl, patches, pattern.patch_size, out.valid,
                             [&](std::size_t k, int row, int col, int c, auto sum, int area) {
                               out.at(k, row, col, c) = static_cast<double>(sum) / area;
                             });
  return out;
}

/// Rounds every sample to the nearest 8-bit level; the representation
/// carried by the token file.
inline TokenTensor quantize_tokens(TokenTensor t) {
  for (auto& v : t.data) v = static_cast<double>(to_u8(v));
  return t;
}

/// Fraction of positive pixels inside each sample's receptive block. Pixels
/// outside the image count as negative.
inline FoveatedMask downsample_mask(const ImageU8& mask, const Placement& placement,
                                    const FoveationPattern& pattern) {
  if (mask.width() != placement.image_width || mask.height() != placement.image_height) {
    throw InputError("mask dimension mismatch: " + std::to_string(mask.width()) + "x" +
                     std::to_string(mask.height()) + " vs image " + std::to_string(placement.image_width) +
                     "x" + std::to_string(placement.image_height));
  }
  const auto ii = IntegralImage<std::uint64_t>(binarize(mask));
  const auto patches = enumerate_patches(pattern);
  std::vector<std::uint8_t> valid;
  FoveatedMask out = make_foveated_mask(pattern, std::vector<std::uint8_t>(patches.size(), 0));
  detail::box_filter_patches(ii, placement, patches, pattern.patch_size, valid,
                             [&](std::size_t k, int row, int col, int, std::uint64_t sum, int area) {
                               out.at(k, row, col) = static_cast<double>(sum) / area;
                             });
  out.valid = std::move(valid);
  return out;
}

inline FoveatedMask downsample_mask(const ImageU8& mask, Point prompt, const FoveationPattern& pattern) {
  return downsample_mask(mask, make_placement(mask.width(), mask.height(), prompt, pattern), pattern);
}

// ---------------------------------------------------------------------------
// Reverse direction: patches back onto their receptive rectangles.

enum class Interp { kNearest, kBilinear };

inline Interp parse_interp(const std::string& s) {
  if (s == "nearest") return Interp::kNearest;
  if (s == "bilinear") return Interp::kBilinear;
  throw InputError("unknown interpolation mode \"" + s + "\" (expected nearest|bilinear)");
}

namespace detail {

/// Paints one T x T x C patch, sampled through `get(row, col, c)`, over a
/// (stride * T)-pixel square. `put(u, v, c, value)` takes rect-local
/// coordinates. Bilinear sampling clamps at the patch edge so neighbouring
/// tokens never bleed into each other.
template <typename Get, typename Put>
void upsample_patch(int patch_size, int stride, int channels, Interp mode, Get&& get, Put&& put) {
  const int extent = patch_size * stride;
  if (mode == Interp::kNearest || stride == 1) {
    for (int v = 0; v < extent; ++v)
      for (int u = 0; u < extent; ++u)
        for (int c = 0; c < channels; ++c) put(u, v, c, get(v / stride, u / stride, c));
    return;
  }
  const double inv = 1.0 / stride;
  const double hi = patch_size - 1.0;
  for (int v = 0; v < extent; ++v) {
    const double fy = std::clamp((v + 0.5) * inv - 0.5, 0.0, hi);
    const int r0 = static_cast<int>(fy);
    const int r1 = std::min(r0 + 1, patch_size - 1);
    const double ty = fy - r0;
    for (int u = 0; u < extent; ++u) {
      const double fx = std::clamp((u + 0.5) * inv - 0.5, 0.0, hi);
      const int c0 = static_cast<int>(fx);
      const int c1 = std::min(c0 + 1, patch_size - 1);
      const double tx = fx - c0;
      for (int c = 0; c < channels; ++c) {
        const double top = (1 - tx) * get(r0, c0, c) + tx * get(r0, c1, c);
        const double bot = (1 - tx) * get(r1, c0, c) + tx * get(r1, c1, c);
        put(u, v, c, (1 - ty) * top + ty * bot);
      }
    }
  }
}

}  // namespace detail

/// Side x side visualization of a token tensor. Invalid tokens render as 0.
inline ImageF detokenize(const TokenTensor& tokens, Interp mode = Interp::kNearest) {
  const auto patches = enumerate_patches(tokens.pattern);
  if (patches.size() != tokens.token_count() || tokens.data.size() != patches.size() * tokens.token_stride()) {
    throw InputError("token tensor does not match its pattern");
  }
  const int side = pattern_size(tokens.pattern);
  ImageF out(side, side, tokens.channels);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    if (!tokens.valid[k]) continue;
    const Rect r = patches[k].rect;
    detail::upsample_patch(
        tokens.patch_size(), patches[k].stride, tokens.channels, mode,
        [&](int row, int col, int c) { return tokens.at(k, row, col, c); },
        [&](int u, int v, int c, double val) { out(r.x + u, r.y + v, c) = val; });
  }
  return out;
}

/// Foveated mask rendered into crop space (side x side, one channel).
inline ImageF render_mask(const FoveatedMask& mask, Interp mode = Interp::kNearest) {
  const auto patches = enumerate_patches(mask.pattern);
  if (patches.size() != mask.token_count()) throw InputError("foveated mask does not match its pattern");
  const int side = pattern_size(mask.pattern);
  ImageF out(side, side, 1);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    if (!mask.valid[k]) continue;
    const Rect r = patches[k].rect;
    detail::upsample_patch(
        mask.pattern.patch_size, patches[k].stride, 1, mode,
        [&](int row, int col, int) { return mask.at(k, row, col); },
        [&](int u, int v, int, double val) { out(r.x + u, r.y + v) = val; });
  }
  return out;
}

}  // namespace fovtok

#endif  // FOVTOK_TOKENIZER_HPP

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

#ifndef FOVTOK_PROMPT_HPP
#define FOVTOK_PROMPT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fovtok/error.hpp"
#include "fovtok/image.hpp"
#include "fovtok/tokenizer.hpp"

namespace fovtok {

using Rng = std::mt19937_64;

namespace detail {

/// 1D lower envelope of parabolas (Felzenszwalb & Huttenlocher). `f` must be
/// finite; output is exact for integer inputs below 2^53.
inline void squared_dt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                          std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  d.resize(static_cast<std::size_t>(n));
  v.resize(static_cast<std::size_t>(n));
  z.resize(static_cast<std::size_t>(n) + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto intersect = [&](int q, int p) {
    return ((f[static_cast<std::size_t>(q)] + double(q) * q) - (f[static_cast<std::size_t>(p)] + double(p) * p)) /
           (2.0 * q - 2.0 * p);
  };
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[static_cast<std::size_t>(k)]);
    while (s <= z[static_cast<std::size_t>(k)]) {
      --k;
      s = intersect(q, v[static_cast<std::size_t>(k)]);
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] = double(q - p) * (q - p) + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace detail

/// Squared Euclidean distance from every pixel to the nearest non-positive
/// pixel, treating everything outside the image as non-positive. Zero on
/// non-positive pixels.
inline std::vector<std::int64_t> squared_distance_to_background(const ImageU8& mask) {
  const int w = mask.width();
  const int h = mask.height();
  // Column pass: distance to the nearest zero in the same column, including
  // the virtual zero rows at y = -1 and y = h.
  std::vector<double> col(static_cast<std::size_t>(w) * h);
  for (int x = 0; x < w; ++x) {
    int last = -1;
    for (int y = 0; y < h; ++y) {
      if (mask(x, y, 0) == 0) last = y;
      col[static_cast<std::size_t>(y) * w + x] = y - last;
    }
    last = h;
    for (int y = h - 1; y >= 0; --y) {
      if (mask(x, y, 0) == 0) last = y;
      auto& c = col[static_cast<std::size_t>(y) * w + x];
      c = std::min<double>(c, last - y);
      c = c * c;
    }
  }
  // Row pass over the padded row [-1, w] whose ends are background.
  std::vector<std::int64_t> out(static_cast<std::size_t>(w) * h);
  std::vector<double> f(static_cast<std::size_t>(w) + 2), d;
  std::vector<int> v;
  std::vector<double> z;
  for (int y = 0; y < h; ++y) {
    f.front() = 0.0;
    f.back() = 0.0;
    for (int x = 0; x < w; ++x) f[static_cast<std::size_t>(x) + 1] = col[static_cast<std::size_t>(y) * w + x];
    detail::squared_dt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) {
      out[static_cast<std::size_t>(y) * w + x] = static_cast<std::int64_t>(d[static_cast<std::size_t>(x) + 1]);
    }
  }
  return out;
}

/// The positive pixel farthest from the segment boundary; ties go to the
/// smallest (y, x).
inline Point select_prompt(const ImageU8& mask) {
  const auto dist = squared_distance_to_background(mask);
  std::int64_t best = 0;
  Point at{-1, -1};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y, 0) == 0) continue;
      const auto d = dist[static_cast<std::size_t>(y) * mask.width() + x];
      if (d > best) {
        best = d;
        at = {x, y};
      }
    }
  }
  if (at.x < 0) throw InputError("empty mask");
  return at;
}

/// Adds an isotropic Gaussian offset, rounds to the nearest pixel and clamps
/// into the image. sigma == 0 returns the input without touching `rng`.
inline Point perturb_prompt(Point p, double sigma, int width, int height, Rng& rng) {
  if (sigma < 0.0) throw InputError("sigma must be non-negative");
  if (sigma == 0.0) return p;
  std::normal_distribution<double> n(0.0, sigma);
  const double dx = n(rng);
  const double dy = n(rng);
  return {std::clamp(static_cast<int>(std::lround(p.x + dx)), 0, width - 1),
          std::clamp(static_cast<int>(std::lround(p.y + dy)), 0, height - 1)};
}

/// Uniform fixation at least `margin` pixels from every border; falls back
/// to the image center when the image is too small for the margin.
inline Point sample_fixation(int width, int height, int margin, Rng& rng) {
  auto axis = [&](int extent) {
    if (extent - 2 * margin <= 0) return extent / 2;
    std::uniform_int_distribution<int> u(margin, extent - 1 - margin);
    return u(rng);
  };
  const int x = axis(width);
  return {x, axis(height)};
}

/// Uniform positive pixel of a mask.
inline Point sample_point_in_mask(const ImageU8& mask, Rng& rng) {
  std::vector<Point> pos;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y, 0) != 0) pos.push_back({x, y});
  if (pos.empty()) throw InputError("empty mask");
  std::uniform_int_distribution<std::size_t> u(0, pos.size() - 1);
  return pos[u(rng)];
}

}  // namespace fovtok

#endif  // FOVTOK_PROMPT_HPP

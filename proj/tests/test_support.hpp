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

// Helpers shared by the test suites: random generators and brute-force
// reference implementations.

#ifndef FOVTOK_TESTS_TEST_SUPPORT_HPP
#define FOVTOK_TESTS_TEST_SUPPORT_HPP

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "fovtok/image.hpp"
#include "fovtok/pattern.hpp"
#include "fovtok/tokenizer.hpp"

namespace fovtok::testing {

/// Random pattern satisfying every nesting constraint by construction:
/// each stride divides the previous level's size, and each grid adds an
/// even number of stride-sized steps around it.
inline FoveationPattern random_valid_pattern(std::mt19937_64& rng, int max_side = 256) {
  for (;;) {
    std::uniform_int_distribution<int> psize(1, 4);
    FoveationPattern p;
    p.patch_size = 1 << (psize(rng) - 1);
    std::uniform_int_distribution<int> s0(1, 3);
    std::uniform_int_distribution<int> g0(1, 5);
    p.levels.push_back({s0(rng), g0(rng)});
    std::uniform_int_distribution<int> nlev(1, 5);
    const int n = nlev(rng);
    while (static_cast<int>(p.levels.size()) < n) {
      const auto& prev = p.levels.back();
      const int size = prev.stride * prev.grid;
      std::vector<int> strides;
      for (int s = prev.stride + 1; s <= size; ++s)
        if (size % s == 0) strides.push_back(s);
      if (strides.empty()) break;
      const int s = strides[std::uniform_int_distribution<std::size_t>(0, strides.size() - 1)(rng)];
      const int ring = std::uniform_int_distribution<int>(1, 3)(rng);
      p.levels.push_back({s, size / s + 2 * ring});
    }
    const auto& outer = p.levels.back();
    if (outer.stride * outer.grid * p.patch_size <= max_side) return p;
  }
}

/// Per-pixel count of patch rectangles covering each crop pixel.
inline std::vector<int> coverage_counts(const FoveationPattern& p) {
  const int side = pattern_size(p);
  std::vector<int> cover(static_cast<std::size_t>(side) * side, 0);
  for (const auto& patch : enumerate_patches(p)) {
    for (int y = patch.rect.y; y < patch.rect.bottom(); ++y)
      for (int x = patch.rect.x; x < patch.rect.right(); ++x) ++cover[static_cast<std::size_t>(y) * side + x];
  }
  return cover;
}

inline ImageU8 random_image(std::mt19937_64& rng, int w, int h, int c) {
  ImageU8 img(w, h, c);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) img(x, y, k) = static_cast<std::uint8_t>(byte(rng));
  return img;
}

/// Union of a few random disks and boxes; at least one pixel is set.
inline ImageU8 random_blob(std::mt19937_64& rng, int w, int h) {
  ImageU8 m(w, h, 1);
  std::uniform_int_distribution<int> shapes(1, 4);
  std::uniform_real_distribution<double> ux(0.0, w);
  std::uniform_real_distribution<double> uy(0.0, h);
  std::uniform_real_distribution<double> ur(1.0, std::max(2.0, std::min(w, h) / 3.0));
  const int n = shapes(rng);
  for (int i = 0; i < n; ++i) {
    const double cx = ux(rng), cy = uy(rng), r = ur(rng), r2 = ur(rng);
    const bool disk = (rng() & 1) != 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dx = x - cx, dy = y - cy;
        const bool in = disk ? dx * dx + dy * dy <= r * r : std::abs(dx) <= r && std::abs(dy) <= r2;
        if (in) m(x, y) = 1;
      }
    }
  }
  m(static_cast<int>(ux(rng)) % w, static_cast<int>(uy(rng)) % h) = 1;
  return m;
}

/// Exact squared distance from every pixel to the nearest zero pixel or to
/// the virtual background just outside the image, by exhaustive search.
inline std::vector<std::int64_t> brute_force_sq_distance(const ImageU8& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<std::pair<int, int>> background;
  for (int y = -1; y <= h; ++y)
    for (int x = -1; x <= w; ++x)
      if (x < 0 || y < 0 || x >= w || y >= h || mask(x, y) == 0) background.emplace_back(x, y);
  std::vector<std::int64_t> d(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(x, y) == 0) continue;
      std::int64_t best = INT64_MAX;
      for (auto [bx, by] : background) {
        const std::int64_t dx = x - bx, dy = y - by;
        best = std::min(best, dx * dx + dy * dy);
      }
      d[static_cast<std::size_t>(y) * w + x] = best;
    }
  }
  return d;
}

/// Farthest-from-boundary positive pixel, ties to the smallest (y, x).
inline Point brute_force_prompt(const ImageU8& mask) {
  const auto d = brute_force_sq_distance(mask);
  Point best{-1, -1};
  std::int64_t bd = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (d[static_cast<std::size_t>(y) * mask.width() + x] > bd) {
        bd = d[static_cast<std::size_t>(y) * mask.width() + x];
        best = {x, y};
      }
  return best;
}

/// Expected IoU by enumerating every joint outcome of independent Bernoulli
/// predictions and targets: E[intersection] / E[union], area weighted.
inline double bernoulli_expected_iou(const std::vector<double>& p, const std::vector<double>& q,
                                     const std::vector<double>& w) {
  const std::size_t n = p.size();
  double ei = 0.0, eu = 0.0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << (2 * n)); ++bits) {
    double prob = 1.0, inter = 0.0, uni = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool a = (bits >> (2 * k)) & 1;
      const bool b = (bits >> (2 * k + 1)) & 1;
      prob *= (a ? p[k] : 1.0 - p[k]) * (b ? q[k] : 1.0 - q[k]);
      inter += (a && b) ? w[k] : 0.0;
      uni += (a || b) ? w[k] : 0.0;
    }
    ei += prob * inter;
    eu += prob * uni;
  }
  return eu == 0.0 ? 1.0 : ei / eu;
}

}  // namespace fovtok::testing

#endif  // FOVTOK_TESTS_TEST_SUPPORT_HPP

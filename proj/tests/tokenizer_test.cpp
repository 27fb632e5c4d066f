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

#include <random>

#include <gtest/gtest.h>

#include "fovtok/integral_image.hpp"
#include "fovtok/tokenizer.hpp"
#include "test_support.hpp"

namespace fovtok {
namespace {

std::uint64_t BruteSum(const ImageU8& img, int x0, int y0, int x1, int y1, int c) {
  std::uint64_t s = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      if (img.in_bounds(x, y)) s += img(x, y, c);
  return s;
}

TEST(IntegralImageTest, TinyExample) {
  ImageU8 img(2, 2, 1);
  img(0, 0) = 1;
  img(1, 0) = 2;
  img(0, 1) = 3;
  img(1, 1) = 4;
  const auto ii = integral_image(img);
  EXPECT_EQ(ii.rect_sum(0, 0, 2, 2), 10u);
  EXPECT_EQ(ii.rect_sum(1, 1, 1, 2), 0u);
  EXPECT_EQ(ii.rect_sum(1, 0, 2, 2), 6u);
}

TEST(IntegralImageTest, MatchesBruteForceIncludingClipping) {
  std::mt19937_64 rng(5);
  const auto img = testing::random_image(rng, 33, 17, 3);
  const auto ii = integral_image(img);
  std::uniform_int_distribution<int> ux(-5, 38), uy(-5, 22);
  for (int i = 0; i < 100; ++i) {
    int x0 = ux(rng), x1 = ux(rng), y0 = uy(rng), y1 = uy(rng);
    if (x1 < x0) std::swap(x0, x1);
    if (y1 < y0) std::swap(y0, y1);
    for (int c = 0; c < 3; ++c) ASSERT_EQ(ii.rect_sum(x0, y0, x1, y1, c), BruteSum(img, x0, y0, x1, y1, c));
  }
}

TEST(IntegralImageTest, EmptyImageRejected) { EXPECT_THROW(integral_image(ImageU8(0, 0, 1)), InputError); }

TEST(CropTest, CenteringRule) {
  const auto p = default_pattern();
  const auto pl = make_placement(4000, 3000, {2000, 1500}, p);
  EXPECT_EQ(pl.origin_x, 1360);
  EXPECT_EQ(pl.origin_y, 860);
  EXPECT_FALSE(pl.needs_padding());

  const auto corner = make_placement(4000, 3000, {0, 0}, p);
  EXPECT_EQ(corner.pad_left(), 640);
  EXPECT_EQ(corner.pad_top(), 640);
  EXPECT_EQ(corner.pad_right(), 0);
  EXPECT_EQ(corner.pad_bottom(), 0);

  EXPECT_THROW(make_placement(10, 10, {10, 0}, p), InputError);
  EXPECT_THROW(make_placement(10, 10, {0, -1}, p), InputError);
}

TEST(CropTest, CropCopiesAndPads) {
  std::mt19937_64 rng(9);
  const auto img = testing::random_image(rng, 50, 40, 1);
  const FoveationPattern p{4, {{1, 4}, {2, 4}}};  // side 32
  const auto crop = crop_with_padding(img, {3, 30}, p);
  ASSERT_EQ(crop.image.width(), 32);
  for (int v = 0; v < 32; ++v) {
    for (int u = 0; u < 32; ++u) {
      const int x = 3 - 16 + u, y = 30 - 16 + v;
      ASSERT_EQ(crop.image(u, v), img.in_bounds(x, y) ? img(x, y) : 0);
    }
  }
}

/// Reference tokenizer: explicit crop, then per-sample block sums by loops.
TEST(TokenizeTest, MatchesBruteForceBlockMeans) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = testing::random_valid_pattern(rng, 160);
    std::uniform_int_distribution<int> dim(5, 200);
    const int w = dim(rng), h = dim(rng);
    const auto img = testing::random_image(rng, w, h, 1 + 2 * (trial % 2));
    const Point prompt{std::uniform_int_distribution<int>(0, w - 1)(rng),
                       std::uniform_int_distribution<int>(0, h - 1)(rng)};
    const auto tokens = tokenize(img, prompt, p);
    const auto crop = crop_with_padding(img, prompt, p);
    const auto patches = enumerate_patches(p);
    ASSERT_EQ(tokens.token_count(), patches.size());
    for (std::size_t k = 0; k < patches.size(); ++k) {
      const auto& r = patches[k].rect;
      const int s = patches[k].stride;
      // Valid iff some pixel of the rect is inside the image.
      bool inside = false;
      for (int v = r.y; v < r.bottom() && !inside; ++v)
        for (int u = r.x; u < r.right() && !inside; ++u)
          inside = img.in_bounds(crop.placement.origin_x + u, crop.placement.origin_y + v);
      ASSERT_EQ(tokens.valid[k] != 0, inside);
      for (int row = 0; row < p.patch_size; ++row) {
        for (int col = 0; col < p.patch_size; ++col) {
          for (int c = 0; c < img.channels(); ++c) {
            std::uint64_t sum = 0;
            for (int v = 0; v < s; ++v)
              for (int u = 0; u < s; ++u) sum += crop.image(r.x + col * s + u, r.y + row * s + v, c);
            const double expect = inside ? static_cast<double>(sum) / (s * s) : 0.0;
            ASSERT_EQ(tokens.at(k, row, col, c), expect);
          }
        }
      }
    }
  }
}

TEST(TokenizeTest, DefaultPatternShapes) {
  const ImageU8 img(1500, 1400, 3, 10);
  const auto t = tokenize(img, {750, 700}, default_pattern());
  EXPECT_EQ(t.token_count(), 172u);
  EXPECT_EQ(t.data.size(), 172u * 16 * 16 * 3);
  EXPECT_EQ(t.valid_count(), 172u);
  const auto corner = tokenize(img, {0, 0}, default_pattern());
  EXPECT_LT(corner.valid_count(), 172u);
  for (std::size_t k = 0; k < corner.token_count(); ++k) {
    if (corner.valid[k]) continue;
    for (double v : corner.token(k)) ASSERT_EQ(v, 0.0);
  }
}

TEST(TokenizeTest, PaddingCountsAsZeroInPartialTokens) {
  const ImageU8 img(64, 64, 1, 200);
  const FoveationPattern p{2, {{1, 4}, {2, 4}, {4, 4}}};  // outer samples are 4x4 blocks
  const auto t = tokenize(img, {0, 0}, p);
  const auto patches = enumerate_patches(p);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    if (patches[k].level != 2 || !t.valid[k]) continue;
    for (double v : t.token(k)) ASSERT_TRUE(v == 0.0 || v == 200.0);
  }
}

TEST(DetokenizeTest, ConstantImageRendersConstant) {
  const ImageU8 img(2000, 1500, 3, 128);
  const auto t = tokenize(img, {1000, 700}, default_pattern());
  for (auto mode : {Interp::kNearest, Interp::kBilinear}) {
    const auto out = detokenize(t, mode);
    ASSERT_EQ(out.width(), 1280);
    for (double v : out.data()) ASSERT_EQ(v, 128.0);
  }
}

TEST(DetokenizeTest, StrideOneLevelIsIdentity) {
  std::mt19937_64 rng(4);
  const auto img = testing::random_image(rng, 200, 200, 1);
  const auto p = default_pattern();
  const auto t = tokenize(img, {100, 100}, p);
  const auto out = detokenize(t, Interp::kBilinear);
  for (int v = 608; v < 672; ++v)
    for (int u = 608; u < 672; ++u) ASSERT_EQ(out(u, v), img(100 - 640 + u, 100 - 640 + v));
}

TEST(DetokenizeTest, RetokenizingNearestRenderIsIdempotent) {
  std::mt19937_64 rng(8);
  const auto img = testing::random_image(rng, 1400, 1300, 1);
  const auto t = quantize_tokens(tokenize(img, {700, 650}, default_pattern()));
  const auto rendered = quantize(detokenize(t, Interp::kNearest));
  EXPECT_EQ(tokenize(rendered, {640, 640}, default_pattern()), t);
}

TEST(DownsampleMaskTest, CoverageFractions) {
  ImageU8 mask(40, 40, 1);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 20; ++x) mask(x, y) = 255;
  const FoveationPattern p{2, {{1, 6}, {3, 4}}};  // side 24, outer samples 3x3
  const auto fm = downsample_mask(mask, Point{19, 20}, p);
  const auto patches = enumerate_patches(p);
  const auto pl = make_placement(40, 40, {19, 20}, p);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto& r = patches[k].rect;
    const int s = patches[k].stride;
    for (int row = 0; row < 2; ++row) {
      for (int col = 0; col < 2; ++col) {
        int pos = 0;
        for (int v = 0; v < s; ++v)
          for (int u = 0; u < s; ++u) {
            const int x = pl.origin_x + r.x + col * s + u, y = pl.origin_y + r.y + row * s + v;
            pos += mask.in_bounds(x, y) && mask(x, y) != 0;
          }
        ASSERT_EQ(fm.at(k, row, col), static_cast<double>(pos) / (s * s));
      }
    }
  }
  EXPECT_THROW(downsample_mask(ImageU8(10, 10, 1), pl, p), InputError);
}

TEST(DownsampleMaskTest, RenderNearestOfConstantToken) {
  const FoveationPattern p{4, {{1, 4}, {2, 4}}};
  auto m = make_foveated_mask(p, std::vector<std::uint8_t>(enumerate_patches(p).size(), 1));
  const auto patches = enumerate_patches(p);
  for (std::size_t k = 0; k < patches.size(); ++k)
    for (int i = 0; i < 16; ++i) m.data[k * 16 + i] = 0.1 * static_cast<double>(k);
  const auto img = render_mask(m, Interp::kNearest);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto& r = patches[k].rect;
    for (int y = r.y; y < r.bottom(); ++y)
      for (int x = r.x; x < r.right(); ++x) ASSERT_EQ(img(x, y), 0.1 * static_cast<double>(k));
  }
}

TEST(SampleAreasTest, StrideSquared) {
  const auto w = sample_areas(default_pattern());
  ASSERT_EQ(w.size(), 44032u);
  EXPECT_EQ(w.front(), 1.0);
  EXPECT_EQ(w.back(), 64.0);
}

TEST(InterpTest, Parse) {
  EXPECT_EQ(parse_interp("nearest"), Interp::kNearest);
  EXPECT_EQ(parse_interp("bilinear"), Interp::kBilinear);
  EXPECT_THROW(parse_interp("cubic"), InputError);
}

}  // namespace
}  // namespace fovtok

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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fovtok/reproject.hpp"
#include "test_support.hpp"

namespace fovtok {
namespace {

FoveatedMask FilledMask(const FoveationPattern& p, double v) {
  auto m = make_foveated_mask(p, std::vector<std::uint8_t>(static_cast<std::size_t>(token_count(p)), 1));
  std::fill(m.data.begin(), m.data.end(), v);
  return m;
}

TEST(ReprojectTest, ConstantMapFillsTheCropOnly) {
  const auto p = default_pattern();
  const auto pl = make_placement(3000, 2000, {100, 1900}, p);
  const auto img = reproject_mask(FilledMask(p, 0.75), pl);
  for (int y = 0; y < 2000; y += 7) {
    for (int x = 0; x < 3000; x += 7) {
      const bool inside = x < 100 + 640 && y >= 1900 - 640;
      ASSERT_EQ(img(x, y), inside ? 0.75 : 0.0) << x << "," << y;
    }
  }
}

TEST(ReprojectTest, InnermostLevelReturnsTheMaskExactly) {
  std::mt19937_64 rng(12);
  const auto p = default_pattern();
  ImageU8 mask(1500, 1500, 1);
  for (auto& v : mask.data()) v = static_cast<std::uint8_t>(rng() % 2);
  const Point prompt{700, 750};
  const auto fm = downsample_mask(mask, prompt, p);
  const auto pl = make_placement(1500, 1500, prompt, p);
  for (auto mode : {Interp::kNearest, Interp::kBilinear}) {
    const auto back = reproject_mask(fm, pl, mode);
    for (int y = 750 - 32; y < 750 + 32; ++y)
      for (int x = 700 - 32; x < 700 + 32; ++x) ASSERT_EQ(back(x, y), mask(x, y));
  }
}

// A stride-8 coarse level cannot beat a plain 8x block downsample of the same
// region; its round trip IoU should be close to that reference.
TEST(ReprojectTest, IouMatchesUniformDownsampleReference) {
  const FoveationPattern p{8, {{8, 16}}};  // a single uniform stride-8 level
  const int side = pattern_size(p);
  ImageU8 mask(side, side, 1);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const double dx = x - 300.3, dy = y - 610.7;
      mask(x, y) = dx * dx + dy * dy < 200.0 * 200.0 ? 1 : 0;
    }
  const auto fm = downsample_mask(mask, Point{side / 2, side / 2}, p);
  const auto pl = make_placement(side, side, {side / 2, side / 2}, p);
  const double iou = binary_iou(reproject_mask(fm, pl, Interp::kNearest), mask);

  ImageF ref(side, side, 1);
  for (int by = 0; by < side; by += 8)
    for (int bx = 0; bx < side; bx += 8) {
      double s = 0;
      for (int y = by; y < by + 8; ++y)
        for (int x = bx; x < bx + 8; ++x) s += mask(x, y);
      for (int y = by; y < by + 8; ++y)
        for (int x = bx; x < bx + 8; ++x) ref(x, y) = s / 64;
    }
  EXPECT_DOUBLE_EQ(iou, binary_iou(ref, mask));
  EXPECT_GT(iou, 0.95);
  EXPECT_GT(binary_iou(reproject_mask(fm, pl, Interp::kBilinear), mask), 0.95);
}

TEST(ReprojectTest, PlacementMustMatchPattern) {
  const auto pl = make_placement(100, 100, {50, 50}, FoveationPattern{2, {{1, 4}}});
  EXPECT_THROW(reproject_mask(FilledMask(default_pattern(), 0), pl), InputError);
}

TEST(SigmoidTest, ValuesAndInvalidTokens) {
  const FoveationPattern p{1, {{1, 2}}};
  auto m = make_foveated_mask(p, {1, 1, 1, 0});
  m.data = {0.0, 2.0, -2.0, 5.0};
  const auto s = sigmoid(m);
  EXPECT_EQ(s.data[0], 0.5);
  EXPECT_DOUBLE_EQ(s.data[1], 1.0 / (1.0 + std::exp(-2.0)));
  EXPECT_DOUBLE_EQ(s.data[1] + s.data[2], 1.0);
  EXPECT_EQ(s.data[3], 0.0);
}

TEST(BinaryIouTest, Cases) {
  ImageF pred(4, 1, 1);
  ImageU8 gt(4, 1, 1);
  pred.data() = {0.9, 0.6, 0.5, 0.1};
  gt.data() = {1, 0, 1, 0};
  // 0.5 itself is below the threshold.
  EXPECT_DOUBLE_EQ(binary_iou(pred, gt), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(binary_iou(pred, gt, 0.05), 2.0 / 4.0);
  EXPECT_EQ(binary_iou(ImageF(3, 3, 1), ImageU8(3, 3, 1)), 1.0);
  EXPECT_THROW(binary_iou(ImageF(3, 3, 1), ImageU8(3, 2, 1)), InputError);
}

}  // namespace
}  // namespace fovtok

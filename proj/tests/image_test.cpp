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
#include <sstream>

#include <gtest/gtest.h>

#include "fovtok/image.hpp"
#include "test_support.hpp"

namespace fovtok {
namespace {

TEST(ImageTest, IndexingIsRowMajorInterleaved) {
  ImageU8 img(3, 2, 3);
  img(2, 1, 1) = 7;
  EXPECT_EQ(img.data()[(1 * 3 + 2) * 3 + 1], 7);
  EXPECT_THROW(ImageU8(-1, 2, 1), InputError);
  EXPECT_THROW(ImageU8(1, 2, 0), InputError);
}

TEST(ImageTest, ToU8RoundsAndSaturates) {
  EXPECT_EQ(to_u8(-3.0), 0);
  EXPECT_EQ(to_u8(0.49), 0);
  EXPECT_EQ(to_u8(0.5), 1);
  EXPECT_EQ(to_u8(127.5), 128);
  EXPECT_EQ(to_u8(254.6), 255);
  EXPECT_EQ(to_u8(1e9), 255);
  EXPECT_EQ(to_u8(std::nan("")), 0);
}

TEST(ImageTest, PnmRoundTrip) {
  std::mt19937_64 rng(1);
  for (int c : {1, 3}) {
    const auto img = testing::random_image(rng, 13, 7, c);
    std::stringstream ss;
    write_pnm(ss, img);
    EXPECT_EQ(read_pnm(ss), img);
  }
}

TEST(ImageTest, PnmHeaderComments) {
  std::stringstream ss;
  ss << "P5\n# comment\n2 # inline\n1\n255\n";
  ss.put(static_cast<char>(9));
  ss.put(static_cast<char>(200));
  const auto img = read_pnm(ss);
  EXPECT_EQ(img.width(), 2);
  EXPECT_EQ(img(1, 0), 200);
}

TEST(ImageTest, PnmErrors) {
  std::stringstream bad_magic("P3\n1 1\n255\n0 0 0");
  EXPECT_THROW(read_pnm(bad_magic), InputError);
  std::stringstream bad_max("P5\n1 1\n65535\n\0\0");
  EXPECT_THROW(read_pnm(bad_max), InputError);
  std::stringstream truncated("P6\n2 2\n255\nabc");
  EXPECT_THROW(read_pnm(truncated), InputError);
  EXPECT_THROW(read_pnm(std::string("/nonexistent.pgm")), IoError);
}

TEST(ImageTest, ResizeIdentityAndConstant) {
  std::mt19937_64 rng(2);
  const auto img = testing::random_image(rng, 9, 5, 3);
  EXPECT_EQ(resize_nearest(img, 9, 5), img);
  EXPECT_EQ(quantize(resize_bilinear(img, 9, 5)), img);
  const ImageU8 gray(4, 3, 1, 77);
  const auto up = resize_bilinear(gray, 17, 11);
  for (double v : up.data()) EXPECT_DOUBLE_EQ(v, 77.0);
}

TEST(ImageTest, NearestUpscaleReplicatesBlocks) {
  ImageU8 img(2, 2, 1);
  img(0, 0) = 1;
  img(1, 0) = 2;
  img(0, 1) = 3;
  img(1, 1) = 4;
  const auto up = resize_nearest(img, 6, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) EXPECT_EQ(up(x, y), img(x / 3, y / 3));
}

TEST(ImageTest, BilinearMidpoint) {
  ImageU8 img(2, 1, 1);
  img(0, 0) = 0;
  img(1, 0) = 100;
  const auto up = resize_bilinear(img, 4, 1);
  // Centers at 0.25, 0.75, 1.25, 1.75 source px -> clamped, 25%, 75%, clamped.
  EXPECT_DOUBLE_EQ(up(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(up(1, 0), 25.0);
  EXPECT_DOUBLE_EQ(up(2, 0), 75.0);
  EXPECT_DOUBLE_EQ(up(3, 0), 100.0);
}

TEST(ImageTest, Binarize) {
  ImageU8 img(2, 1, 3);
  img(1, 0, 0) = 255;
  img(0, 0, 1) = 255;  // only the first channel counts
  const auto b = binarize(img);
  EXPECT_EQ(b.channels(), 1);
  EXPECT_EQ(b(0, 0), 0);
  EXPECT_EQ(b(1, 0), 1);
}

}  // namespace
}  // namespace fovtok

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
#include <set>

#include <gtest/gtest.h>

#include "fovtok/pattern.hpp"
#include "test_support.hpp"

namespace fovtok {
namespace {

FoveationPattern Pattern(std::vector<FoveationLevel> levels, int patch = 16) { return {patch, std::move(levels)}; }

bool HasViolation(const FoveationPattern& p, const std::string& constraint, int level) {
  for (const auto& v : validate(p))
    if (v.constraint == constraint && v.level == level) return true;
  return false;
}

TEST(PatternValidate, DefaultPatternIsValid) { EXPECT_TRUE(validate(default_pattern()).empty()); }

TEST(PatternValidate, SingleLevelIsValid) { EXPECT_TRUE(is_valid(Pattern({{1, 4}}))); }

TEST(PatternValidate, CenteringViolationNamesLevel) {
  const auto p = Pattern({{1, 4}, {2, 5}});
  EXPECT_TRUE(HasViolation(p, "centering_divisibility", 1));
  EXPECT_EQ(validate(p).size(), 1u);
}

TEST(PatternValidate, ReportsEveryViolation) {
  const auto p = Pattern({{2, 4}, {2, 3}, {4, 5}});
  EXPECT_TRUE(HasViolation(p, "stride_increasing", 1));
  EXPECT_TRUE(HasViolation(p, "size_increasing", 1));
  EXPECT_TRUE(HasViolation(p, "hole_divisibility", 2));
}

TEST(PatternValidate, HoleDivisibility) {
  EXPECT_TRUE(HasViolation(Pattern({{1, 3}, {2, 4}}), "hole_divisibility", 1));
  EXPECT_FALSE(HasViolation(Pattern({{1, 4}, {2, 4}}), "hole_divisibility", 1));
}

TEST(PatternValidate, NonPositiveFields) {
  EXPECT_TRUE(HasViolation(Pattern({{0, 4}}), "stride_positive", 0));
  EXPECT_TRUE(HasViolation(Pattern({{1, 0}}), "grid_positive", 0));
  EXPECT_TRUE(HasViolation(Pattern({{1, 4}}, 0), "patch_size_positive", -1));
  EXPECT_TRUE(HasViolation(Pattern({}), "empty_levels", -1));
}

TEST(PatternValidate, ViolationDescriptionNamesConstraint) {
  try {
    require_valid(Pattern({{1, 4}, {2, 5}}));
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("centering_divisibility"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("level 1"), std::string::npos);
  }
}

TEST(PatternGeometry, DefaultPatternRegression) {
  const auto p = default_pattern();
  EXPECT_EQ(tokens_per_level(p), (std::vector<std::int64_t>{16, 12, 32, 48, 64}));
  EXPECT_EQ(token_count(p), 172);
  EXPECT_EQ(pattern_size(p), 1280);
  EXPECT_EQ(pixel_count(p), 44032);
  EXPECT_EQ(enumerate_patches(p).size(), 172u);
}

TEST(PatternGeometry, SmallPatterns) {
  const auto one = Pattern({{1, 4}});
  EXPECT_EQ(token_count(one), 16);
  EXPECT_EQ(pattern_size(one), 64);
  EXPECT_EQ(pixel_count(one), 4096);
  for (const auto& patch : enumerate_patches(one)) {
    EXPECT_EQ(patch.rect.w, 16);
    EXPECT_EQ(patch.rect.h, 16);
  }
  const auto two = Pattern({{1, 4}, {2, 4}});
  EXPECT_EQ(token_count(two), 28);
  EXPECT_EQ(enumerate_patches(two).size(), 28u);
}

TEST(PatternGeometry, OrderIsLevelThenRowMajor) {
  const auto patches = enumerate_patches(default_pattern());
  for (std::size_t i = 1; i < patches.size(); ++i) {
    const auto& a = patches[i - 1];
    const auto& b = patches[i];
    ASSERT_LE(a.level, b.level);
    if (a.level == b.level) {
      ASSERT_TRUE(a.rect.y < b.rect.y || (a.rect.y == b.rect.y && a.rect.x < b.rect.x));
    }
    ASSERT_EQ(b.rect.w, b.stride * 16);
  }
  EXPECT_EQ(patches.front().rect, (Rect{608, 608, 16, 16}));
}

TEST(PatternGeometry, DefaultPatternCoverageIsExact) {
  const auto cover = testing::coverage_counts(default_pattern());
  for (int c : cover) ASSERT_EQ(c, 1);
}

TEST(PatternProperty, RandomPatternsTileAndMatchClosedForm) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = testing::random_valid_pattern(rng);
    ASSERT_TRUE(is_valid(p)) << serialize_pattern(p);
    const auto cover = testing::coverage_counts(p);
    for (int c : cover) ASSERT_EQ(c, 1) << serialize_pattern(p);
    EXPECT_EQ(token_count(p), static_cast<std::int64_t>(enumerate_patches(p).size()));
  }
}

TEST(StrideAt, Examples) {
  const auto p = default_pattern();
  EXPECT_EQ(stride_at(p, 0), (StrideAt{1, 1}));
  EXPECT_EQ(stride_at(p, 100), (StrideAt{4, 4}));
  EXPECT_EQ(stride_at(p, 500), (StrideAt{8, 8}));
  EXPECT_EQ(stride_breakpoints(p), (std::vector<double>{32, 64, 192, 384, 640}));
}

TEST(StrideAt, BreakpointsAndMonotone) {
  const auto p = default_pattern();
  const auto half = stride_breakpoints(p);
  for (std::size_t i = 0; i + 1 < half.size(); ++i) {
    EXPECT_EQ(stride_at(p, half[i] - 0.5).input_stride, p.levels[i].stride);
    EXPECT_EQ(stride_at(p, half[i]).input_stride, p.levels[i + 1].stride);
  }
  int prev = 0;
  for (double d = 0; d < 640; d += 0.25) {
    const auto s = stride_at(p, d);
    ASSERT_GE(s.input_stride, prev);
    ASSERT_EQ(s.input_stride, s.output_stride);
    prev = s.input_stride;
  }
  EXPECT_THROW(stride_at(p, 640), InputError);
  EXPECT_THROW(stride_at(p, -1), InputError);
}

TEST(PatternConfig, RoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto p = testing::random_valid_pattern(rng);
    EXPECT_EQ(parse_pattern(serialize_pattern(p)), p);
  }
  EXPECT_EQ(parse_pattern(serialize_pattern(default_pattern())), default_pattern());
}

TEST(PatternConfig, ParsesDefaultConfigFile) {
  EXPECT_EQ(load_pattern(FOVTOK_SOURCE_DIR "/configs/default_pattern.json"), default_pattern());
}

TEST(PatternConfig, Errors) {
  auto message = [](const std::string& text) {
    try {
      parse_pattern(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_EQ(message(R"({"patch_size": 16, "levels": []})"), "empty levels");
  EXPECT_NE(message(R"({"patch_size": 16, "levels": [], "x": 1})").find("unknown key"), std::string::npos);
  EXPECT_NE(message(R"({"patch_size": 16, "levels": [{"stride": 1, "grid": 4, "z": 0}]})").find("unknown key"),
            std::string::npos);
  EXPECT_NE(message("{not json").find("malformed"), std::string::npos);
  EXPECT_NE(message(R"({"patch_size": 16, "levels": [{"stride": 1, "grid": 4}, {"stride": 2, "grid": 5}]})")
                .find("centering_divisibility"),
            std::string::npos);
  EXPECT_NE(message(R"({"patch_size": 16.5, "levels": [{"stride": 1, "grid": 4}]})").find("integer"),
            std::string::npos);
  EXPECT_THROW(load_pattern("/nonexistent/pattern.json"), IoError);
}

}  // namespace
}  // namespace fovtok

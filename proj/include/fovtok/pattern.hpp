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

// Foveation patterns: nested square rings of patches whose stride grows with
// distance from the center. Level 0 is a dense g0 x g0 grid; every further
// level i is a g_i x g_i grid of (s_i * p)-pixel patches centered on the same
// point, of which only the ring outside level i-1 is kept.

#ifndef FOVTOK_PATTERN_HPP
#define FOVTOK_PATTERN_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fovtok/error.hpp"

namespace fovtok {

struct FoveationLevel {
  int stride = 1;
  int grid = 1;

  friend bool operator==(const FoveationLevel&, const FoveationLevel&) = default;
};

struct FoveationPattern {
  int patch_size = 16;
  std::vector<FoveationLevel> levels;

  friend bool operator==(const FoveationPattern&, const FoveationPattern&) = default;
};

/// Axis-aligned rectangle in integer pixel coordinates, half-open.
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool contains(int px, int py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// One token's receptive field in crop coordinates.
struct PatchSpec {
  int level = 0;
  int stride = 1;
  Rect rect;

  friend bool operator==(const PatchSpec&, const PatchSpec&) = default;
};

struct PatternViolation {
  std::string constraint;
  int level = -1;  // -1 when the violation is not tied to a level

  std::string describe() const {
    if (level < 0) return constraint;
    return constraint + " at level " + std::to_string(level);
  }
  friend bool operator==(const PatternViolation&, const PatternViolation&) = default;
};

/// Every violated constraint, in level order. Empty means the pattern is valid.
inline std::vector<PatternViolation> validate(const FoveationPattern& pattern) {
  std::vector<PatternViolation> out;
  if (pattern.patch_size < 1) out.push_back({"patch_size_positive", -1});
  if (pattern.levels.empty()) {
    out.push_back({"empty_levels", -1});
    return out;
  }
  for (std::size_t i = 0; i < pattern.levels.size(); ++i) {
    const int lvl = static_cast<int>(i);
    const auto& cur = pattern.levels[i];
    if (cur.stride < 1) out.push_back({"stride_positive", lvl});
    if (cur.grid < 1) out.push_back({"grid_positive", lvl});
    if (i == 0 || cur.stride < 1 || cur.grid < 1) continue;
    const auto& prev = pattern.levels[i - 1];
    if (prev.stride < 1 || prev.grid < 1) continue;

    const std::int64_t size = std::int64_t{cur.grid} * cur.stride;
    const std::int64_t prev_size = std::int64_t{prev.grid} * prev.stride;
    if (cur.stride <= prev.stride) out.push_back({"stride_increasing", lvl});
    if (size <= prev_size) {
      out.push_back({"size_increasing", lvl});
    } else {
      const std::int64_t diff = size - prev_size;
      if (diff % 2 != 0 || (diff / 2) % cur.stride != 0) {
        out.push_back({"centering_divisibility", lvl});
      }
    }
    if (prev_size % cur.stride != 0) out.push_back({"hole_divisibility", lvl});
  }
  return out;
}

inline bool is_valid(const FoveationPattern& pattern) {
  return validate(pattern).empty();
}

inline std::string describe_violations(const std::vector<PatternViolation>& v) {
  std::string s;
  for (const auto& item : v) {
    if (!s.empty()) s += "; ";
    s += item.describe();
  }
  return s;
}

inline void require_valid(const FoveationPattern& pattern) {
  auto v = validate(pattern);
  if (!v.empty()) throw InputError("invalid foveation pattern: " + describe_violations(v));
}

/// Side length of the square crop covered by the pattern, in pixels.
inline int pattern_size(const FoveationPattern& pattern) {
  require_valid(pattern);
  const auto& outer = pattern.levels.back();
  return outer.grid * outer.stride * pattern.patch_size;
}

/// Closed-form token count: all grids minus the holes each level leaves for
/// the level inside it.
inline std::int64_t token_count(const FoveationPattern& pattern) {
  require_valid(pattern);
  std::int64_t total = 0;
  for (const auto& l : pattern.levels) total += std::int64_t{l.grid} * l.grid;
  for (std::size_t i = 1; i < pattern.levels.size(); ++i) {
    const auto& prev = pattern.levels[i - 1];
    const std::int64_t hole = std::int64_t{prev.grid} * prev.stride / pattern.levels[i].stride;
    total -= hole * hole;
  }
  return total;
}

/// Samples actually transmitted per channel.
inline std::int64_t pixel_count(const FoveationPattern& pattern) {
  return token_count(pattern) * pattern.patch_size * pattern.patch_size;
}

/// Bounding box of a level inside the crop.
inline Rect level_bounds(const FoveationPattern& pattern, int level) {
  const int side = pattern_size(pattern);
  const auto& l = pattern.levels.at(static_cast<std::size_t>(level));
  const int extent = l.grid * l.stride * pattern.patch_size;
  const int offset = (side - extent) / 2;
  return {offset, offset, extent, extent};
}

/// Patches ordered by level, then row-major within the level.
inline std::vector<PatchSpec> enumerate_patches(const FoveationPattern& pattern) {
  require_valid(pattern);
  std::vector<PatchSpec> out;
  out.reserve(static_cast<std::size_t>(token_count(pattern)));
  for (std::size_t i = 0; i < pattern.levels.size(); ++i) {
    const auto& l = pattern.levels[i];
    const int level = static_cast<int>(i);
    const Rect box = level_bounds(pattern, level);
    const Rect hole = i == 0 ? Rect{} : level_bounds(pattern, level - 1);
    const int step = l.stride * pattern.patch_size;
    for (int r = 0; r < l.grid; ++r) {
      for (int c = 0; c < l.grid; ++c) {
        const Rect rect{box.x + c * step, box.y + r * step, step, step};
        // Nesting constraints guarantee a patch is either fully inside the
        // hole or fully outside it, so testing one corner suffices.
        if (i > 0 && hole.contains(rect.x, rect.y)) continue;
        out.push_back({level, l.stride, rect});
      }
    }
  }
  return out;
}

/// Kept tokens per level.
inline std::vector<std::int64_t> tokens_per_level(const FoveationPattern& pattern) {
  std::vector<std::int64_t> counts(pattern.levels.size(), 0);
  for (const auto& p : enumerate_patches(pattern)) ++counts[static_cast<std::size_t>(p.level)];
  return counts;
}

/// Half-extent of each level in pixels; these are the stride breakpoints.
inline std::vector<double> stride_breakpoints(const FoveationPattern& pattern) {
  require_valid(pattern);
  std::vector<double> out;
  for (const auto& l : pattern.levels) {
    out.push_back(0.5 * l.grid * l.stride * pattern.patch_size);
  }
  return out;
}

struct StrideAt {
  int input_stride = 1;
  int output_stride = 1;
  friend bool operator==(const StrideAt&, const StrideAt&) = default;
};

/// Input and output sampling stride at distance `d` from the center along an
/// axis. The decoder emits one label per input sample, so both match.
inline StrideAt stride_at(const FoveationPattern& pattern, double d) {
  const auto half = stride_breakpoints(pattern);
  if (!(d >= 0.0) || d >= half.back()) {
    throw InputError("distance " + std::to_string(d) + " outside pattern");
  }
  for (std::size_t i = 0; i < half.size(); ++i) {
    if (d < half[i]) {
      const int s = pattern.levels[i].stride;
      return {s, s};
    }
  }
  return {pattern.levels.back().stride, pattern.levels.back().stride};
}

// ---------------------------------------------------------------------------
// Config text

inline std::string serialize_pattern(const FoveationPattern& pattern) {
  nlohmann::ordered_json j;
  j["patch_size"] = pattern.patch_size;
  j["levels"] = nlohmann::ordered_json::array();
  for (const auto& l : pattern.levels) {
    j["levels"].push_back({{"stride", l.stride}, {"grid", l.grid}});
  }
  return j.dump(2) + "\n";
}

namespace detail {

inline int positive_int_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where + ": missing key \"" + key + "\"");
  if (!it->is_number_integer()) throw InputError(where + ": \"" + key + "\" must be an integer");
  const auto v = it->get<std::int64_t>();
  if (v < 1 || v > (1 << 20)) throw InputError(where + ": \"" + key + "\" out of range");
  return static_cast<int>(v);
}

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) throw InputError(where + ": unknown key \"" + it.key() + "\"");
  }
}

}  // namespace detail

/// Parses and validates a pattern config. Throws InputError naming the first
/// structural problem or every violated nesting constraint.
inline FoveationPattern parse_pattern(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("malformed pattern config: ") + e.what());
  }
  if (!j.is_object()) throw InputError("pattern config must be an object");
  detail::reject_unknown_keys(j, {"patch_size", "levels"}, "pattern config");

  FoveationPattern p;
  p.patch_size = detail::positive_int_field(j, "patch_size", "pattern config");
  auto levels = j.find("levels");
  if (levels == j.end() || !levels->is_array()) throw InputError("pattern config: \"levels\" must be an array");
  if (levels->empty()) throw InputError("empty levels");
  for (std::size_t i = 0; i < levels->size(); ++i) {
    const auto& lj = (*levels)[i];
    const std::string where = "levels[" + std::to_string(i) + "]";
    if (!lj.is_object()) throw InputError(where + " must be an object");
    detail::reject_unknown_keys(lj, {"stride", "grid"}, where);
    p.levels.push_back({detail::positive_int_field(lj, "stride", where),
                        detail::positive_int_field(lj, "grid", where)});
  }
  require_valid(p);
  return p;
}

inline FoveationPattern load_pattern(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open pattern config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pattern(ss.str());
}

/// The five-level pattern used by the reference models: 172 tokens over a
/// 1280-pixel crop.
inline FoveationPattern default_pattern() {
  return {16, {{1, 4}, {2, 4}, {4, 6}, {6, 8}, {8, 10}}};
}

}  // namespace fovtok

#endif  // FOVTOK_PATTERN_HPP

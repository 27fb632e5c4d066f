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

#ifndef FOVTOK_INTEGRAL_IMAGE_HPP
#define FOVTOK_INTEGRAL_IMAGE_HPP

#include <algorithm>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "fovtok/error.hpp"
#include "fovtok/image.hpp"

namespace fovtok {

/// Summed-area table with one (width+1) x (height+1) accumulator plane per
/// channel. Integer inputs accumulate in uint64, so sums are exact.
template <typename Acc = std::uint64_t>
class IntegralImage {
 public:
  IntegralImage() = default;

  template <typename T>
  explicit IntegralImage(const Image<T>& img)
      : width_(img.width()), height_(img.height()), channels_(img.channels()) {
    static_assert(std::is_integral_v<T> == std::is_integral_v<Acc>,
                  "integer images need an integer accumulator");
    if (img.empty()) throw InputError("integral image of an empty image");
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    table_.assign(stride * (static_cast<std::size_t>(height_) + 1) * channels_, Acc{0});
    for (int c = 0; c < channels_; ++c) {
      for (int y = 0; y < height_; ++y) {
        Acc row = 0;
        for (int x = 0; x < width_; ++x) {
          row += static_cast<Acc>(img(x, y, c));
          at(x + 1, y + 1, c) = at(x + 1, y, c) + row;
        }
      }
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  /// Sum over [x0, x1) x [y0, y1). The rectangle is clipped to the image;
  /// pixels outside contribute zero.
  Acc rect_sum(int x0, int y0, int x1, int y1, int c = 0) const {
    x0 = std::clamp(x0, 0, width_);
    x1 = std::clamp(x1, 0, width_);
    y0 = std::clamp(y0, 0, height_);
    y1 = std::clamp(y1, 0, height_);
    if (x1 <= x0 || y1 <= y0) return Acc{0};
    return at(x1, y1, c) - at(x1, y0, c) - at(x0, y1, c) + at(x0, y0, c);
  }

 private:
  Acc& at(int x, int y, int c) {
    return table_[(static_cast<std::size_t>(c) * (height_ + 1) + y) * (width_ + 1) + x];
  }
  const Acc& at(int x, int y, int c) const {
    return table_[(static_cast<std::size_t>(c) * (height_ + 1) + y) * (width_ + 1) + x];
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<Acc> table_;
};

template <typename T>
auto integral_image(const Image<T>& img) {
  if constexpr (std::is_integral_v<T>) {
    return IntegralImage<std::uint64_t>(img);
  } else {
    return IntegralImage<double>(img);
  }
}

}  // namespace fovtok

#endif  // FOVTOK_INTEGRAL_IMAGE_HPP

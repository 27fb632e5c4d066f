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

#ifndef FOVTOK_IMAGE_HPP
#define FOVTOK_IMAGE_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fovtok/error.hpp"

namespace fovtok {

/// Row-major, channel-interleaved image.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 1) throw InputError("bad image dimensions");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& operator()(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

using ImageU8 = Image<std::uint8_t>;
using ImageF = Image<double>;

/// Rounds to nearest and saturates to [0, 255].
inline std::uint8_t to_u8(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v));
}

template <typename T>
ImageU8 quantize(const Image<T>& img) {
  ImageU8 out(img.width(), img.height(), img.channels());
  for (std::size_t i = 0; i < img.size(); ++i) out.data()[i] = to_u8(static_cast<double>(img.data()[i]));
  return out;
}

template <typename T>
ImageF to_real(const Image<T>& img) {
  ImageF out(img.width(), img.height(), img.channels());
  for (std::size_t i = 0; i < img.size(); ++i) out.data()[i] = static_cast<double>(img.data()[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Resampling. Pixel centers sit at integer + 0.5 in both grids.

template <typename T>
Image<T> resize_nearest(const Image<T>& src, int width, int height) {
  Image<T> out(width, height, src.channels());
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  for (int y = 0; y < height; ++y) {
    const int yy = std::min(src.height() - 1, static_cast<int>(std::floor((y + 0.5) * sy)));
    for (int x = 0; x < width; ++x) {
      const int xx = std::min(src.width() - 1, static_cast<int>(std::floor((x + 0.5) * sx)));
      for (int c = 0; c < src.channels(); ++c) out(x, y, c) = src(xx, yy, c);
    }
  }
  return out;
}

template <typename T>
ImageF resize_bilinear(const Image<T>& src, int width, int height) {
  ImageF out(width, height, src.channels());
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double tx = fx - x0;
      for (int c = 0; c < src.channels(); ++c) {
        const double top = (1 - tx) * src(x0, y0, c) + tx * src(x1, y0, c);
        const double bot = (1 - tx) * src(x0, y1, c) + tx * src(x1, y1, c);
        out(x, y, c) = (1 - ty) * top + ty * bot;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary PGM (P5) / PPM (P6), maxval 255.

namespace detail {

inline std::string pnm_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      tok.push_back(ch);
      break;
    }
  }
  while (in.get(ch)) {
    if (std::isspace(static_cast<unsigned char>(ch))) break;
    tok.push_back(ch);
  }
  return tok;
}

inline int pnm_int(std::istream& in, const char* what) {
  const std::string tok = pnm_token(in);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      tok.size() > 9) {
    throw InputError(std::string("bad PNM header field: ") + what);
  }
  return std::stoi(tok);
}

}  // namespace detail

inline ImageU8 read_pnm(std::istream& in) {
  const std::string magic = detail::pnm_token(in);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw InputError("unsupported PNM magic \"" + magic + "\" (expected P5 or P6)");
  }
  const int w = detail::pnm_int(in, "width");
  const int h = detail::pnm_int(in, "height");
  const int maxval = detail::pnm_int(in, "maxval");
  if (w < 1 || h < 1) throw InputError("PNM image has zero size");
  if (maxval != 255) throw InputError("only 8-bit PNM (maxval 255) is supported");
  ImageU8 img(w, h, channels);
  in.read(reinterpret_cast<char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.size())) throw InputError("truncated PNM payload");
  return img;
}

inline ImageU8 read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_pnm(in);
}

inline void write_pnm(std::ostream& out, const ImageU8& img) {
  if (img.channels() != 1 && img.channels() != 3) throw InputError("PNM supports 1 or 3 channels");
  out << (img.channels() == 1 ? "P5" : "P6") << "\n" << img.width() << " " << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
}

inline void write_pnm(const std::string& path, const ImageU8& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_pnm(out, img);
  if (!out) throw IoError("write failed for " + path);
}

/// Mask convention: any nonzero sample of the first channel is positive.
inline Image<std::uint8_t> binarize(const ImageU8& img) {
  Image<std::uint8_t> out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(x, y) = img(x, y, 0) != 0 ? 1 : 0;
  return out;
}

}  // namespace fovtok

#endif  // FOVTOK_IMAGE_HPP

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

// Small dense row-major matrices and the layer primitives of the nano
// network, generic over double and ad::Var.

#ifndef FOVTOK_NANO_TENSOR_HPP
#define FOVTOK_NANO_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fovtok/autodiff.hpp"
#include "fovtok/error.hpp"

namespace fovtok::nano {

template <typename T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> v;

  Mat() = default;
  Mat(int r, int c, T fill = T(0.0)) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

  T& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  const T& operator()(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  const T* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
  T* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
};

namespace detail {
inline void check_shape(bool ok, const char* what) {
  if (!ok) throw InputError(std::string("shape mismatch in ") + what);
}
}  // namespace detail

template <typename T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
  detail::check_shape(a.cols == b.rows, "matmul");
  Mat<T> out(a.rows, b.cols);
  if constexpr (is_ad_v<T>) {
    for (int i = 0; i < a.rows; ++i)
      for (int j = 0; j < b.cols; ++j) out(i, j) = ad::dot(a.row(i), 1, &b(0, j), b.cols, static_cast<std::size_t>(a.cols));
  } else {
    for (int i = 0; i < a.rows; ++i) {
      T* o = out.row(i);
      for (int k = 0; k < a.cols; ++k) {
        const T aik = a(i, k);
        const T* br = b.row(k);
        for (int j = 0; j < b.cols; ++j) o[j] += aik * br[j];
      }
    }
  }
  return out;
}

/// Adds a 1 x cols row to every row.
template <typename T>
Mat<T> add_row(Mat<T> a, const Mat<T>& r) {
  detail::check_shape(r.rows == 1 && r.cols == a.cols, "add_row");
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) a(i, j) = a(i, j) + r(0, j);
  return a;
}

template <typename T>
Mat<T> add(Mat<T> a, const Mat<T>& b) {
  detail::check_shape(a.rows == b.rows && a.cols == b.cols, "add");
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] = a.v[i] + b.v[i];
  return a;
}

template <typename T>
Mat<T> linear(const Mat<T>& x, const Mat<T>& w, const Mat<T>& b) {
  return add_row(matmul(x, w), b);
}

template <typename T>
Mat<T> layer_norm(const Mat<T>& x, const Mat<T>& gain, const Mat<T>& bias, double eps = 1e-5) {
  detail::check_shape(gain.cols == x.cols && bias.cols == x.cols, "layer_norm");
  using std::sqrt;
  Mat<T> out(x.rows, x.cols);
  const double inv_n = 1.0 / x.cols;
  std::vector<T> centered(static_cast<std::size_t>(x.cols));
  for (int i = 0; i < x.rows; ++i) {
    const T mean = sum_of<T>(std::span<const T>(x.row(i), static_cast<std::size_t>(x.cols))) * inv_n;
    for (int j = 0; j < x.cols; ++j) centered[static_cast<std::size_t>(j)] = x(i, j) - mean;
    const T var = dot_strided<T>(centered.data(), 1, centered.data(), 1, centered.size()) * inv_n;
    const T inv_std = 1.0 / sqrt(var + eps);
    for (int j = 0; j < x.cols; ++j) out(i, j) = centered[static_cast<std::size_t>(j)] * inv_std * gain(0, j) + bias(0, j);
  }
  return out;
}

template <typename T>
T gelu(const T& x) {
  using std::tanh;
  constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
  return 0.5 * x * (1.0 + tanh(kC * (x + 0.044715 * x * x * x)));
}

template <typename T>
Mat<T> gelu(Mat<T> x) {
  for (auto& e : x.v) e = gelu(e);
  return x;
}

template <typename T>
T sigmoid(const T& x) {
  using std::exp;
  if (value_of(x) >= 0.0) return 1.0 / (1.0 + exp(-x));
  const T e = exp(x);
  return e / (1.0 + e);
}

template <typename T>
Mat<T> slice_rows(const Mat<T>& a, int begin, int end) {
  detail::check_shape(begin >= 0 && end <= a.rows && begin <= end, "slice_rows");
  Mat<T> out(end - begin, a.cols);
  std::copy(a.row(begin), a.row(begin) + static_cast<std::ptrdiff_t>(out.v.size()), out.v.begin());
  return out;
}

template <typename T>
Mat<T> concat_rows(const Mat<T>& a, const Mat<T>& b) {
  detail::check_shape(a.cols == b.cols, "concat_rows");
  Mat<T> out(a.rows + b.rows, a.cols);
  std::copy(a.v.begin(), a.v.end(), out.v.begin());
  std::copy(b.v.begin(), b.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(a.v.size()));
  return out;
}

/// Multi-head scaled dot-product attention. Keys (and their values) whose
/// `key_mask` entry is 0 are skipped outright, so their contents cannot
/// affect any output bit. An empty mask means all keys participate.
template <typename T>
Mat<T> attention(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v, int n_head,
                 std::span<const std::uint8_t> key_mask = {}) {
  detail::check_shape(q.cols == k.cols && k.cols == v.cols && k.rows == v.rows, "attention");
  detail::check_shape(q.cols % n_head == 0, "attention heads");
  detail::check_shape(key_mask.empty() || key_mask.size() == static_cast<std::size_t>(k.rows), "attention mask");
  using std::exp;
  std::vector<int> keys;
  for (int j = 0; j < k.rows; ++j)
    if (key_mask.empty() || key_mask[static_cast<std::size_t>(j)]) keys.push_back(j);
  const int nk = static_cast<int>(keys.size());
  Mat<T> kk(nk, k.cols);
  Mat<T> vv(nk, v.cols);
  for (int j = 0; j < nk; ++j) {
    std::copy(k.row(keys[static_cast<std::size_t>(j)]), k.row(keys[static_cast<std::size_t>(j)]) + k.cols, kk.row(j));
    std::copy(v.row(keys[static_cast<std::size_t>(j)]), v.row(keys[static_cast<std::size_t>(j)]) + v.cols, vv.row(j));
  }

  const int dh = q.cols / n_head;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat<T> out(q.rows, q.cols);
  if (nk == 0) return out;
  std::vector<T> logits(static_cast<std::size_t>(nk));
  std::vector<T> weights(static_cast<std::size_t>(nk));
  for (int h = 0; h < n_head; ++h) {
    const int off = h * dh;
    for (int i = 0; i < q.rows; ++i) {
      double max_logit = -INFINITY;
      for (int j = 0; j < nk; ++j) {
        auto& l = logits[static_cast<std::size_t>(j)];
        l = dot_strided<T>(q.row(i) + off, 1, kk.row(j) + off, 1, static_cast<std::size_t>(dh)) * scale;
        max_logit = std::max(max_logit, value_of(l));
      }
      for (int j = 0; j < nk; ++j) weights[static_cast<std::size_t>(j)] = exp(logits[static_cast<std::size_t>(j)] - max_logit);
      const T z = sum_of<T>(weights);
      const T inv_z = 1.0 / z;
      for (auto& w : weights) w = w * inv_z;
      for (int t = 0; t < dh; ++t) {
        out(i, off + t) = dot_strided<T>(weights.data(), 1, vv.row(0) + off + t, vv.cols, static_cast<std::size_t>(nk));
      }
    }
  }
  return out;
}

/// Rearranges a 2x2 transposed-convolution result. Input rows are
/// (item, y, x) at resolution `res` with columns (ky, kx, c); output rows are
/// (item, 2y+ky, 2x+kx) at resolution 2*res with columns c.
template <typename T>
Mat<T> pixel_shuffle(const Mat<T>& x, int items, int res) {
  detail::check_shape(x.rows == items * res * res && x.cols % 4 == 0, "pixel_shuffle");
  const int c = x.cols / 4;
  const int out_res = 2 * res;
  Mat<T> out(items * out_res * out_res, c);
  for (int it = 0; it < items; ++it) {
    for (int y = 0; y < res; ++y) {
      for (int xx = 0; xx < res; ++xx) {
        const T* src = x.row((it * res + y) * res + xx);
        for (int ky = 0; ky < 2; ++ky) {
          for (int kx = 0; kx < 2; ++kx) {
            T* dst = out.row((it * out_res + 2 * y + ky) * out_res + 2 * xx + kx);
            std::copy(src + (ky * 2 + kx) * c, src + (ky * 2 + kx + 1) * c, dst);
          }
        }
      }
    }
  }
  return out;
}

/// Repeats a 1 x c row `times` times side by side.
template <typename T>
Mat<T> tile_cols(const Mat<T>& r, int times) {
  Mat<T> out(1, r.cols * times);
  for (int t = 0; t < times; ++t) std::copy(r.v.begin(), r.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(t) * r.cols);
  return out;
}

}  // namespace fovtok::nano

#endif  // FOVTOK_NANO_TENSOR_HPP

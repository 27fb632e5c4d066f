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

#ifndef FOVTOK_NANO_PARAMS_HPP
#define FOVTOK_NANO_PARAMS_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fovtok/error.hpp"
#include "fovtok/nano/tensor.hpp"

namespace fovtok::nano {

enum class Init { kNormal, kZeros, kOnes };

struct ParamEntry {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  Init init = Init::kNormal;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/// Named matrices packed into one flat parameter vector, in insertion order.
class ParamLayout {
 public:
  void add(const std::string& name, int rows, int cols, Init init) {
    if (index_.count(name) != 0) throw Error("duplicate parameter " + name);
    index_[name] = entries_.size();
    entries_.push_back({name, rows, cols, total_, init});
    total_ += static_cast<std::size_t>(rows) * cols;
  }

  /// Weight matrix plus zero-initialized bias row.
  void add_linear(const std::string& prefix, int in, int out) {
    add(prefix + ".w", in, out, Init::kNormal);
    add(prefix + ".b", 1, out, Init::kZeros);
  }

  void add_norm(const std::string& prefix, int dim) {
    add(prefix + ".g", 1, dim, Init::kOnes);
    add(prefix + ".b", 1, dim, Init::kZeros);
  }

  const ParamEntry& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("unknown parameter " + name);
    return entries_[it->second];
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<ParamEntry>& entries() const { return entries_; }
  std::size_t size() const { return total_; }

  /// Name of the matrix that owns flat index `i`.
  std::string owner(std::size_t i) const {
    for (const auto& e : entries_)
      if (i >= e.offset && i < e.offset + e.size()) return e.name;
    return "?";
  }

  template <typename T>
  Mat<T> get(const std::vector<T>& theta, const std::string& name) const {
    const auto& e = at(name);
    Mat<T> m(e.rows, e.cols);
    std::copy(theta.begin() + static_cast<std::ptrdiff_t>(e.offset),
              theta.begin() + static_cast<std::ptrdiff_t>(e.offset + e.size()), m.v.begin());
    return m;
  }

 private:
  std::vector<ParamEntry> entries_;
  std::map<std::string, std::size_t> index_;
  std::size_t total_ = 0;
};

/// Truncated normal (|x| <= 2 std) weights, zero biases, unit norm gains.
inline std::vector<double> init_params(const ParamLayout& layout, std::uint64_t seed, double std_dev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> theta(layout.size(), 0.0);
  for (const auto& e : layout.entries()) {
    for (std::size_t i = 0; i < e.size(); ++i) {
      double& v = theta[e.offset + i];
      switch (e.init) {
        case Init::kZeros: v = 0.0; break;
        case Init::kOnes: v = 1.0; break;
        case Init::kNormal: {
          double z;
          do {
            z = normal(rng);
          } while (std::abs(z) > 2.0);
          v = z * std_dev;
          break;
        }
      }
    }
  }
  return theta;
}

template <typename T>
Mat<T> apply_linear(const ParamLayout& layout, const std::vector<T>& theta, const std::string& prefix,
                    const Mat<T>& x) {
  return linear(x, layout.get(theta, prefix + ".w"), layout.get(theta, prefix + ".b"));
}

template <typename T>
Mat<T> apply_norm(const ParamLayout& layout, const std::vector<T>& theta, const std::string& prefix,
                  const Mat<T>& x) {
  return layer_norm(x, layout.get(theta, prefix + ".g"), layout.get(theta, prefix + ".b"));
}

/// Projects queries from `xq` and keys/values from `xkv`, attends, projects
/// back. Parameters live under prefix.{q,k,v,o}.
inline void add_attention_params(ParamLayout& layout, const std::string& prefix, int dim) {
  for (const char* p : {".q", ".k", ".v", ".o"}) layout.add_linear(prefix + p, dim, dim);
}

template <typename T>
Mat<T> apply_attention(const ParamLayout& layout, const std::vector<T>& theta, const std::string& prefix,
                       const Mat<T>& xq, const Mat<T>& xkv, int n_head,
                       std::span<const std::uint8_t> key_mask = {}) {
  const auto q = apply_linear(layout, theta, prefix + ".q", xq);
  const auto k = apply_linear(layout, theta, prefix + ".k", xkv);
  const auto v = apply_linear(layout, theta, prefix + ".v", xkv);
  return apply_linear(layout, theta, prefix + ".o", attention(q, k, v, n_head, key_mask));
}

inline void add_mlp_params(ParamLayout& layout, const std::string& prefix, int in, int hidden, int out) {
  layout.add_linear(prefix + ".fc1", in, hidden);
  layout.add_linear(prefix + ".fc2", hidden, out);
}

template <typename T>
Mat<T> apply_mlp(const ParamLayout& layout, const std::vector<T>& theta, const std::string& prefix, const Mat<T>& x) {
  return apply_linear(layout, theta, prefix + ".fc2", gelu(apply_linear(layout, theta, prefix + ".fc1", x)));
}

/// Pre-norm transformer block.
inline void add_block_params(ParamLayout& layout, const std::string& prefix, int dim, int d_ff) {
  layout.add_norm(prefix + ".ln1", dim);
  add_attention_params(layout, prefix + ".attn", dim);
  layout.add_norm(prefix + ".ln2", dim);
  add_mlp_params(layout, prefix + ".mlp", dim, d_ff, dim);
}

template <typename T>
Mat<T> apply_block(const ParamLayout& layout, const std::vector<T>& theta, const std::string& prefix,
                   const Mat<T>& x, int n_head, std::span<const std::uint8_t> key_mask) {
  const auto n1 = apply_norm(layout, theta, prefix + ".ln1", x);
  const auto h = add(x, apply_attention(layout, theta, prefix + ".attn", n1, n1, n_head, key_mask));
  return add(h, apply_mlp(layout, theta, prefix + ".mlp", apply_norm(layout, theta, prefix + ".ln2", h)));
}

}  // namespace fovtok::nano

#endif  // FOVTOK_NANO_PARAMS_HPP

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

// Masked-autoencoder pre-training on foveated tokens.
//
// The encoder sees only the kept tokens (masked ones are excluded as
// attention keys, exactly like out-of-image tokens). A small reconstruction
// head replaces every masked token's feature with a learned mask token, adds
// its own position encodings, runs two transformer blocks and projects back
// to T*T*C samples. The loss is the mean squared error over masked, valid
// tokens against the foveated token samples scaled to [0, 1].

#ifndef FOVTOK_NANO_MAE_HPP
#define FOVTOK_NANO_MAE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fovtok/error.hpp"
#include "fovtok/nano/model.hpp"
#include "fovtok/nano/params.hpp"

namespace fovtok::nano {

inline constexpr int kMaeHeadDepth = 2;

struct MaeMask {
  std::vector<std::size_t> kept;    // ascending token indices
  std::vector<std::size_t> masked;  // ascending token indices
};

/// Masks round(down) n_valid * ratio of the valid tokens uniformly at random.
/// Invalid tokens are in neither set.
inline MaeMask mae_mask(std::span<const std::uint8_t> valid, double ratio, std::mt19937_64& rng) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("mask ratio must lie in (0, 1)");
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < valid.size(); ++k)
    if (valid[k]) ids.push_back(k);
  // Keep count is floor(n * (1 - ratio)); the epsilon absorbs representation
  // error such as 172 * 0.25 = 42.99999.
  const auto keep = static_cast<std::size_t>(std::floor(static_cast<double>(ids.size()) * (1.0 - ratio) + 1e-9));
  // Fisher-Yates with an explicit draw so the result does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(ids[i - 1], ids[j]);
  }
  MaeMask m;
  m.kept.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep));
  m.masked.assign(ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end());
  std::sort(m.kept.begin(), m.kept.end());
  std::sort(m.masked.begin(), m.masked.end());
  return m;
}

class MaeNet {
 public:
  explicit MaeNet(NanoConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    tokens_ = static_cast<int>(token_count(cfg_.pattern));
    const int d = cfg_.d_model;
    add_encoder_params(layout_, cfg_, tokens_);
    layout_.add("mae.mask_token", 1, d, Init::kNormal);
    layout_.add("mae.pos", tokens_, d, Init::kNormal);
    for (int l = 0; l < kMaeHeadDepth; ++l) add_block_params(layout_, "mae." + std::to_string(l), d, cfg_.d_ff);
    layout_.add_norm("mae.ln_f", d);
    const int dim = cfg_.pattern.patch_size * cfg_.pattern.patch_size * cfg_.channels;
    layout_.add_linear("mae.head", d, dim);
  }

  const NanoConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }

  /// Reconstructed samples for every token, tokens x (T*T*C), in [0, 1] units.
  template <typename T>
  Mat<T> reconstruct(const std::vector<T>& theta, const TokenTensor& tokens, const MaeMask& mask) const {
    std::vector<std::uint8_t> visible(tokens.token_count(), 0);
    for (auto k : mask.kept) visible.at(k) = 1;
    const auto enc = NanoNet::encode_with(layout_, cfg_, theta, tokens, visible);

    auto x = slice_rows(enc.features, 1, enc.features.rows);
    const auto mask_token = layout_.get(theta, "mae.mask_token");
    for (int t = 0; t < tokens_; ++t) {
      if (!visible[static_cast<std::size_t>(t)]) std::copy(mask_token.v.begin(), mask_token.v.end(), x.row(t));
    }
    x = add(x, layout_.get(theta, "mae.pos"));
    // Invalid tokens stay out of the head's attention as well.
    for (int l = 0; l < kMaeHeadDepth; ++l) {
      x = apply_block(layout_, theta, "mae." + std::to_string(l), x, cfg_.n_heads, tokens.valid);
    }
    return apply_linear(layout_, theta, "mae.head", apply_norm(layout_, theta, "mae.ln_f", x));
  }

  template <typename T>
  T loss(const std::vector<T>& theta, const TokenTensor& tokens, const MaeMask& mask) const {
    if (mask.masked.empty()) throw InputError("no masked tokens");
    const auto pred = reconstruct(theta, tokens, mask);
    const auto target = token_matrix(tokens);
    T total(0.0);
    std::size_t n = 0;
    for (auto k : mask.masked) {
      const int r = static_cast<int>(k);
      for (int j = 0; j < pred.cols; ++j) {
        const T diff = pred(r, j) - target(r, j);
        total = total + diff * diff;
      }
      n += static_cast<std::size_t>(pred.cols);
    }
    return total * (1.0 / static_cast<double>(n));
  }

 private:
  NanoConfig cfg_;
  ParamLayout layout_;
  int tokens_ = 0;
};

}  // namespace fovtok::nano

#endif  // FOVTOK_NANO_MAE_HPP

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

// A miniature foveated segmentation network.
//
// Encoder: one linear projection per token, learned per-index position
// encodings, a register token (with its own position encoding) prepended at
// row 0, then pre-norm transformer blocks. Tokens whose validity flag is 0
// are never used as attention keys; they are still computed as queries and
// their outputs ignored downstream.
//
// Decoder: n_masks + 1 learned query tokens (row 0 predicts IoU) run a
// two-way transformer against the encoder output, register included. Each
// image token's feature vector is then grown from 1x1 to patch_size x
// patch_size by 2x2 stride-2 transposed convolutions that halve the channel
// count at every step. Mask logits are the dot product of each upsampled
// pixel with a per-mask MLP embedding of the corresponding query token.

#ifndef FOVTOK_NANO_MODEL_HPP
#define FOVTOK_NANO_MODEL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fovtok/error.hpp"
#include "fovtok/losses.hpp"
#include "fovtok/nano/params.hpp"
#include "fovtok/nano/tensor.hpp"
#include "fovtok/pattern.hpp"
#include "fovtok/tokenizer.hpp"

namespace fovtok::nano {

struct NanoConfig {
  FoveationPattern pattern = default_pattern();
  int channels = 3;
  int d_model = 32;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 64;
  int n_masks = 3;
  int decoder_depth = 2;
  int decoder_heads = 4;
  int decoder_mlp = 64;
  double init_std = 0.02;
  std::uint64_t seed = 0;

  friend bool operator==(const NanoConfig&, const NanoConfig&) = default;
};

inline int upscale_steps(int patch_size) {
  int steps = 0;
  while ((1 << steps) < patch_size) ++steps;
  return steps;
}

inline void validate(const NanoConfig& c) {
  require_valid(c.pattern);
  if (c.channels < 1 || c.d_model < 1 || c.n_layers < 0 || c.n_heads < 1 || c.d_ff < 1 || c.n_masks < 1 ||
      c.decoder_depth < 0 || c.decoder_heads < 1 || c.decoder_mlp < 1) {
    throw InputError("nano config dimensions must be positive");
  }
  if (c.d_model % c.n_heads != 0 || c.d_model % c.decoder_heads != 0) {
    throw InputError("d_model must be divisible by the head counts");
  }
  if ((1 << upscale_steps(c.pattern.patch_size)) != c.pattern.patch_size) {
    throw InputError("nano model needs a power-of-two patch size");
  }
  if (!(c.init_std > 0.0)) throw InputError("init_std must be positive");
}

/// Channel count after each upscaling step: d_model halved per step, floored at 1.
inline std::vector<int> upscale_channels(const NanoConfig& c) {
  std::vector<int> ch;
  int cur = c.d_model;
  for (int s = 0; s < upscale_steps(c.pattern.patch_size); ++s) {
    cur = std::max(1, cur / 2);
    ch.push_back(cur);
  }
  return ch;
}

inline void add_encoder_params(ParamLayout& layout, const NanoConfig& c, int tokens) {
  const int d = c.d_model;
  const int in = c.pattern.patch_size * c.pattern.patch_size * c.channels;
  layout.add_linear("patch_embed", in, d);
  layout.add("pos_embed", tokens, d, Init::kNormal);
  layout.add("register.token", 1, d, Init::kNormal);
  layout.add("register.pos", 1, d, Init::kNormal);
  for (int l = 0; l < c.n_layers; ++l) add_block_params(layout, "enc." + std::to_string(l), d, c.d_ff);
  layout.add_norm("enc.ln_f", d);
}

inline ParamLayout build_layout(const NanoConfig& c) {
  validate(c);
  const int tokens = static_cast<int>(token_count(c.pattern));
  const int d = c.d_model;
  ParamLayout layout;
  add_encoder_params(layout, c, tokens);

  layout.add("dec.query_tokens", c.n_masks + 1, d, Init::kNormal);
  for (int l = 0; l < c.decoder_depth; ++l) {
    const std::string p = "dec." + std::to_string(l);
    add_attention_params(layout, p + ".self", d);
    layout.add_norm(p + ".norm1", d);
    add_attention_params(layout, p + ".t2i", d);
    layout.add_norm(p + ".norm2", d);
    add_mlp_params(layout, p + ".mlp", d, c.decoder_mlp, d);
    layout.add_norm(p + ".norm3", d);
    add_attention_params(layout, p + ".i2t", d);
    layout.add_norm(p + ".norm4", d);
  }
  add_attention_params(layout, "dec.final.t2i", d);
  layout.add_norm("dec.final.norm", d);

  int prev = d;
  const auto ch = upscale_channels(c);
  for (std::size_t s = 0; s < ch.size(); ++s) {
    const std::string p = "dec.upscale." + std::to_string(s);
    layout.add(p + ".w", prev, 4 * ch[s], Init::kNormal);
    layout.add(p + ".b", 1, ch[s], Init::kZeros);
    prev = ch[s];
  }
  for (int m = 0; m < c.n_masks; ++m) add_mlp_params(layout, "dec.hyper." + std::to_string(m), d, d, prev);
  add_mlp_params(layout, "dec.iou_head", d, d, c.n_masks);
  return layout;
}

template <typename T>
struct EncoderOutput {
  Mat<T> features;                     // (tokens + 1) x d_model, register at row 0
  std::vector<std::uint8_t> key_mask;  // 1 for the register and every participating token
};

template <typename T>
struct ModelOutputT {
  std::vector<std::vector<T>> mask_logits;  // n_masks x (tokens * T * T), token-major
  std::vector<T> iou_pred;
};

/// Token samples scaled to [0, 1].
inline Mat<double> token_matrix(const TokenTensor& tokens) {
  const int n = static_cast<int>(tokens.token_count());
  const int dim = static_cast<int>(tokens.token_stride());
  Mat<double> x(n, dim);
  for (std::size_t i = 0; i < tokens.data.size(); ++i) x.v[i] = tokens.data[i] / 255.0;
  return x;
}

template <typename T>
Mat<T> lift(const Mat<double>& m) {
  if constexpr (std::is_same_v<T, double>) {
    return m;
  } else {
    Mat<T> out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.v.size(); ++i) out.v[i] = T(m.v[i]);
    return out;
  }
}

/// Architecture (config + parameter layout) without parameter values; the
/// forward passes take the flat parameter vector explicitly.
class NanoNet {
 public:
  explicit NanoNet(NanoConfig cfg) : cfg_(std::move(cfg)), layout_(build_layout(cfg_)) {
    tokens_ = static_cast<int>(token_count(cfg_.pattern));
  }

  const NanoConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  int tokens() const { return tokens_; }

  void check_tokens(const TokenTensor& t) const {
    if (!(t.pattern == cfg_.pattern) || t.channels != cfg_.channels ||
        t.token_count() != static_cast<std::size_t>(tokens_) || t.data.size() != t.token_count() * t.token_stride()) {
      throw InputError("shape mismatch: token tensor does not match the model configuration");
    }
  }

  /// `participating` overrides the validity flags as the attention key mask
  /// (used to hide MAE-masked tokens); empty means use tokens.valid.
  template <typename T>
  EncoderOutput<T> encode(const std::vector<T>& theta, const TokenTensor& tokens,
                          std::span<const std::uint8_t> participating = {}) const {
    return encode_with(layout_, cfg_, theta, tokens, participating);
  }

  /// Encoder forward against any layout containing the encoder parameters.
  template <typename T>
  static EncoderOutput<T> encode_with(const ParamLayout& layout, const NanoConfig& cfg, const std::vector<T>& theta,
                                      const TokenTensor& tokens, std::span<const std::uint8_t> participating = {}) {
    const std::span<const std::uint8_t> valid = participating.empty() ? std::span<const std::uint8_t>(tokens.valid)
                                                                      : participating;
    if (valid.size() != tokens.token_count()) throw InputError("shape mismatch: key mask size");
    auto x = apply_linear(layout, theta, "patch_embed", lift<T>(token_matrix(tokens)));
    x = add(x, layout.get(theta, "pos_embed"));
    const auto reg = add(layout.get(theta, "register.token"), layout.get(theta, "register.pos"));
    x = concat_rows(reg, x);

    EncoderOutput<T> out;
    out.key_mask.reserve(valid.size() + 1);
    out.key_mask.push_back(1);
    out.key_mask.insert(out.key_mask.end(), valid.begin(), valid.end());
    for (int l = 0; l < cfg.n_layers; ++l) {
      x = apply_block(layout, theta, "enc." + std::to_string(l), x, cfg.n_heads, out.key_mask);
    }
    out.features = apply_norm(layout, theta, "enc.ln_f", x);
    return out;
  }

  template <typename T>
  ModelOutputT<T> decode(const std::vector<T>& theta, const EncoderOutput<T>& enc,
                         std::span<const std::uint8_t> valid) const {
    const int d = cfg_.d_model;
    const int h = cfg_.decoder_heads;
    if (enc.features.rows != tokens_ + 1 || enc.features.cols != d || valid.size() != static_cast<std::size_t>(tokens_)) {
      throw InputError("shape mismatch: decoder input");
    }
    auto q = layout_.get(theta, "dec.query_tokens");
    auto ctx = enc.features;
    const std::span<const std::uint8_t> mask(enc.key_mask);
    for (int l = 0; l < cfg_.decoder_depth; ++l) {
      const std::string p = "dec." + std::to_string(l);
      q = apply_norm(layout_, theta, p + ".norm1", add(q, apply_attention(layout_, theta, p + ".self", q, q, h)));
      q = apply_norm(layout_, theta, p + ".norm2",
                     add(q, apply_attention(layout_, theta, p + ".t2i", q, ctx, h, mask)));
      q = apply_norm(layout_, theta, p + ".norm3", add(q, apply_mlp(layout_, theta, p + ".mlp", q)));
      ctx = apply_norm(layout_, theta, p + ".norm4",
                       add(ctx, apply_attention(layout_, theta, p + ".i2t", ctx, q, h)));
    }
    q = apply_norm(layout_, theta, "dec.final.norm",
                   add(q, apply_attention(layout_, theta, "dec.final.t2i", q, ctx, h, mask)));

    // Per-token upsampling, register excluded.
    auto maps = slice_rows(ctx, 1, ctx.rows);
    const auto ch = upscale_channels(cfg_);
    int res = 1;
    for (std::size_t s = 0; s < ch.size(); ++s) {
      const std::string p = "dec.upscale." + std::to_string(s);
      const auto bias = tile_cols(layout_.get(theta, p + ".b"), 4);
      maps = gelu(pixel_shuffle(linear(maps, layout_.get(theta, p + ".w"), bias), tokens_, res));
      res *= 2;
    }

    ModelOutputT<T> out;
    const int per = res * res;
    for (int m = 0; m < cfg_.n_masks; ++m) {
      const auto hyper = apply_mlp(layout_, theta, "dec.hyper." + std::to_string(m), slice_rows(q, 1 + m, 2 + m));
      std::vector<T> logits(static_cast<std::size_t>(tokens_) * per, T(0.0));
      for (int t = 0; t < tokens_; ++t) {
        if (!valid[static_cast<std::size_t>(t)]) continue;
        for (int i = 0; i < per; ++i) {
          logits[static_cast<std::size_t>(t) * per + i] =
              dot_strided<T>(maps.row(t * per + i), 1, hyper.row(0), 1, static_cast<std::size_t>(maps.cols));
        }
      }
      out.mask_logits.push_back(std::move(logits));
    }
    const auto iou = apply_mlp(layout_, theta, "dec.iou_head", slice_rows(q, 0, 1));
    out.iou_pred = iou.v;
    return out;
  }

  template <typename T>
  ModelOutputT<T> forward(const std::vector<T>& theta, const TokenTensor& tokens) const {
    check_tokens(tokens);
    return decode(theta, encode(theta, tokens), tokens.valid);
  }

  /// Min-over-masks segmentation loss of one (tokens, target) example.
  /// `select` pins the selected mask instead of taking the argmin.
  template <typename T>
  CombinedLoss<T> loss(const std::vector<T>& theta, const TokenTensor& tokens, const FoveatedMask& target,
                       const LossWeights& weights = {}, std::optional<std::size_t> select = std::nullopt) const {
    if (!(target.pattern == cfg_.pattern) || target.valid != tokens.valid) {
      throw InputError("shape mismatch: target does not match tokens");
    }
    const auto out = forward(theta, tokens);
    std::vector<std::vector<T>> probs;
    for (const auto& logits : out.mask_logits) {
      std::vector<T> p(logits.size());
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = sigmoid(logits[i]);
      probs.push_back(std::move(p));
    }
    const auto w = fovtok::detail::mask_weights(target, target);
    auto l = combined_loss<T>(probs, out.iou_pred, target.data, w, weights);
    if (select) {
      if (*select >= l.mask_losses.size()) throw InputError("selected mask out of range");
      l.best_index = *select;
      l.total = l.mask_losses[*select] + l.iou_loss;
    }
    return l;
  }

 private:
  NanoConfig cfg_;
  ParamLayout layout_;
  int tokens_ = 0;
};

/// Model output in foveated space: one map of logits per mask.
struct ModelOutput {
  std::vector<FoveatedMask> masks;
  std::vector<double> iou_pred;
};

/// A network together with its parameter values.
class NanoModel {
 public:
  explicit NanoModel(NanoConfig cfg) : net_(std::move(cfg)) {
    params_ = init_params(net_.layout(), net_.config().seed, net_.config().init_std);
  }
  NanoModel(NanoConfig cfg, std::vector<double> params) : net_(std::move(cfg)), params_(std::move(params)) {
    if (params_.size() != net_.layout().size()) throw InputError("parameter count does not match the configuration");
  }

  const NanoNet& net() const { return net_; }
  const NanoConfig& config() const { return net_.config(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  ModelOutput predict(const TokenTensor& tokens) const {
    const auto raw = net_.forward(params_, tokens);
    ModelOutput out;
    for (auto& logits : raw.mask_logits) {
      FoveatedMask m = make_foveated_mask(tokens.pattern, tokens.valid);
      m.data = logits;
      out.masks.push_back(std::move(m));
    }
    out.iou_pred = raw.iou_pred;
    return out;
  }

 private:
  NanoNet net_;
  std::vector<double> params_;
};

// ---------------------------------------------------------------------------
// Config JSON

inline void to_json(nlohmann::json& j, const NanoConfig& c) {
  j = {{"pattern", nlohmann::json::parse(serialize_pattern(c.pattern))},
       {"channels", c.channels},
       {"d_model", c.d_model},
       {"n_layers", c.n_layers},
       {"n_heads", c.n_heads},
       {"d_ff", c.d_ff},
       {"n_masks", c.n_masks},
       {"decoder_depth", c.decoder_depth},
       {"decoder_heads", c.decoder_heads},
       {"decoder_mlp", c.decoder_mlp},
       {"init_std", c.init_std},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, NanoConfig& c) {
  c.pattern = parse_pattern(j.at("pattern").dump());
  j.at("channels").get_to(c.channels);
  j.at("d_model").get_to(c.d_model);
  j.at("n_layers").get_to(c.n_layers);
  j.at("n_heads").get_to(c.n_heads);
  j.at("d_ff").get_to(c.d_ff);
  j.at("n_masks").get_to(c.n_masks);
  j.at("decoder_depth").get_to(c.decoder_depth);
  j.at("decoder_heads").get_to(c.decoder_heads);
  j.at("decoder_mlp").get_to(c.decoder_mlp);
  j.at("init_std").get_to(c.init_std);
  j.at("seed").get_to(c.seed);
}

}  // namespace fovtok::nano

#endif  // FOVTOK_NANO_MODEL_HPP

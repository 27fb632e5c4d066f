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

// FLOP counts for transformer encoders and promptable mask decoders.
//
// Counts follow the per-layer expressions of Kaplan et al. (one multiply-add
// is two FLOPs). Non-linearities, biases and normalizations are omitted.
// Every count is for a single image and a single prompt.

#ifndef FOVTOK_COSTMODEL_HPP
#define FOVTOK_COSTMODEL_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fovtok/error.hpp"

namespace fovtok::cost {

using Flops = std::uint64_t;

struct WindowConfig {
  int window = 14;               // w: window side in tokens
  int map_side = 64;             // s: token map side
  std::vector<int> global_layers;  // layers with full attention

  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

struct CostConfig {
  int d_model = 768;
  int d_attn = 768;
  int d_ff = 3072;
  int n_head = 12;
  int n_layers = 12;
  int n_tokens = 173;
  std::optional<WindowConfig> window;

  friend bool operator==(const CostConfig&, const CostConfig&) = default;
};

inline void check(const CostConfig& c) {
  if (c.d_model < 1 || c.d_attn < 1 || c.d_ff < 1 || c.n_head < 1 || c.n_layers < 1 || c.n_tokens < 1) {
    throw InputError("cost config dimensions must be positive");
  }
  if (c.d_attn % c.n_head != 0) throw InputError("d_attn must be divisible by n_head");
  if (c.window) {
    if (c.window->window < 1 || c.window->map_side < 1) throw InputError("window sizes must be positive");
    for (int l : c.window->global_layers)
      if (l < 0 || l >= c.n_layers) throw InputError("global layer index out of range");
  }
}

struct AttentionFlops {
  Flops qkv = 0;
  Flops logits = 0;
  Flops softmax = 0;
  Flops reduce = 0;
  Flops project = 0;

  Flops total() const { return qkv + logits + softmax + reduce + project; }
};

inline AttentionFlops attention_flops(std::uint64_t d_model, std::uint64_t d_attn, std::uint64_t n_head,
                                      std::uint64_t n_query, std::uint64_t n_key) {
  return {2 * d_model * d_attn * (n_query + 2 * n_key), 2 * n_query * n_key * d_attn,
          3 * n_query * n_key * n_head, 2 * n_query * n_key * d_attn, 2 * n_query * d_model * d_attn};
}

inline Flops feedforward_flops(std::uint64_t n_query, std::uint64_t d_model, std::uint64_t d_ff) {
  return 4 * n_query * d_model * d_ff;
}

inline Flops linear_flops(std::uint64_t n_vals, std::uint64_t d_in, std::uint64_t d_out) {
  return 2 * n_vals * d_in * d_out;
}

inline Flops conv_flops(std::uint64_t d_in, std::uint64_t d_out, std::uint64_t w_out, std::uint64_t h_out,
                        std::uint64_t w_kernel, std::uint64_t h_kernel) {
  return 2 * d_in * d_out * w_out * h_out * w_kernel * h_kernel;
}

/// One transformer layer: attention over (n_query, n_key) plus feedforward on
/// the queries.
inline Flops attention_layer_flops(const CostConfig& cfg, std::uint64_t n_query, std::uint64_t n_key) {
  return attention_flops(cfg.d_model, cfg.d_attn, cfg.n_head, n_query, n_key).total() +
         feedforward_flops(n_query, cfg.d_model, cfg.d_ff);
}

/// Self-attention encoder layer over n tokens.
inline Flops encoder_layer_flops(const CostConfig& cfg, std::uint64_t n_tokens) {
  return attention_layer_flops(cfg, n_tokens, n_tokens);
}

inline std::uint64_t window_count(const WindowConfig& w) {
  const std::uint64_t per_side = (static_cast<std::uint64_t>(w.map_side) + w.window - 1) / w.window;
  return per_side * per_side;
}

/// Encoder with local windowed attention: global layers see all s^2 tokens,
/// the rest run ceil(s/w)^2 independent windows of w^2 tokens.
inline Flops windowed_encoder_flops(const CostConfig& cfg) {
  check(cfg);
  if (!cfg.window) throw InputError("windowed encoder needs a window config");
  const auto& w = *cfg.window;
  const std::uint64_t s2 = static_cast<std::uint64_t>(w.map_side) * w.map_side;
  const std::uint64_t w2 = static_cast<std::uint64_t>(w.window) * w.window;
  const Flops global = encoder_layer_flops(cfg, s2);
  const Flops local = window_count(w) * encoder_layer_flops(cfg, w2);
  Flops total = 0;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const bool is_global = std::find(w.global_layers.begin(), w.global_layers.end(), l) != w.global_layers.end();
    total += is_global ? global : local;
  }
  return total;
}

inline Flops encoder_flops(const CostConfig& cfg) {
  check(cfg);
  if (cfg.window) return windowed_encoder_flops(cfg);
  return static_cast<Flops>(cfg.n_layers) * encoder_layer_flops(cfg, static_cast<std::uint64_t>(cfg.n_tokens));
}

// ---------------------------------------------------------------------------
// Whole models

struct ConvSpec {
  int d_in = 0;
  int d_out = 0;
  int w_out = 0;
  int h_out = 0;
  int kernel = 1;
  int repeat = 1;  // independent applications (e.g. once per token)

  Flops flops() const {
    return static_cast<Flops>(repeat) * conv_flops(d_in, d_out, w_out, h_out, kernel, kernel);
  }
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct PatchEmbedSpec {
  enum class Kind { kLinear, kConv };
  Kind kind = Kind::kLinear;
  int n_vals = 0;  // linear: number of patches
  int d_in = 0;    // linear: flattened patch size; conv: input channels
  int d_out = 0;
  int map_side = 0;  // conv: output side
  int kernel = 0;    // conv: kernel side

  Flops flops() const {
    if (kind == Kind::kLinear) return linear_flops(n_vals, d_in, d_out);
    return conv_flops(d_in, d_out, map_side, map_side, kernel, kernel);
  }
  friend bool operator==(const PatchEmbedSpec&, const PatchEmbedSpec&) = default;
};

/// Two-way transformer mask decoder. Cross-attention runs at
/// d_model / attn_downsample.
struct DecoderCostConfig {
  int d_model = 256;
  int depth = 2;
  int n_head = 8;
  int attn_downsample = 2;
  int mlp_dim = 2048;
  int n_queries = 4;   // output tokens plus any prompt tokens
  int n_context = 173;
  int n_masks = 3;     // hypernetwork MLPs / mask logits produced
  std::vector<int> hyper_mlp;  // layer widths, e.g. {256, 256, 256, 16}
  std::vector<int> iou_head;   // layer widths, e.g. {256, 256, 256, 3}
  std::vector<ConvSpec> deconvs;
  std::uint64_t mask_pixels = 0;  // logits per mask
  int mask_channels = 16;         // channels of the upsampled map

  friend bool operator==(const DecoderCostConfig&, const DecoderCostConfig&) = default;
};

struct DecoderFlops {
  Flops transformer = 0;
  Flops deconv = 0;
  Flops mlps = 0;
  Flops mask_product = 0;

  Flops total() const { return transformer + deconv + mlps + mask_product; }
};

inline Flops mlp_flops(const std::vector<int>& widths, std::uint64_t n_vals = 1) {
  Flops f = 0;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) f += linear_flops(n_vals, widths[i], widths[i + 1]);
  return f;
}

inline DecoderFlops decoder_flops(const DecoderCostConfig& d) {
  if (d.d_model < 1 || d.depth < 0 || d.n_head < 1 || d.attn_downsample < 1 || d.mlp_dim < 1 ||
      d.n_queries < 1 || d.n_context < 1 || d.n_masks < 1) {
    throw InputError("decoder cost config dimensions must be positive");
  }
  const std::uint64_t dm = d.d_model;
  const std::uint64_t cross = dm / static_cast<std::uint64_t>(d.attn_downsample);
  const std::uint64_t q = d.n_queries;
  const std::uint64_t ctx = d.n_context;
  DecoderFlops out;
  Flops layer = attention_flops(dm, dm, d.n_head, q, q).total();  // query self-attention
  layer += attention_flops(dm, cross, d.n_head, q, ctx).total();  // queries -> context
  layer += feedforward_flops(q, dm, d.mlp_dim);
  layer += attention_flops(dm, cross, d.n_head, ctx, q).total();  // context -> queries
  out.transformer = static_cast<Flops>(d.depth) * layer + attention_flops(dm, cross, d.n_head, q, ctx).total();
  for (const auto& c : d.deconvs) out.deconv += c.flops();
  out.mlps = static_cast<Flops>(d.n_masks) * mlp_flops(d.hyper_mlp) + mlp_flops(d.iou_head);
  out.mask_product = linear_flops(d.mask_pixels, d.mask_channels, d.n_masks);
  return out;
}

struct ModelCostConfig {
  std::string name;
  PatchEmbedSpec patch_embed;
  CostConfig encoder;
  std::vector<ConvSpec> neck;
  DecoderCostConfig decoder;

  friend bool operator==(const ModelCostConfig&, const ModelCostConfig&) = default;
};

struct StageFlops {
  std::string stage;
  Flops flops = 0;
};

struct ModelFlops {
  std::string name;
  std::vector<StageFlops> stages;
  Flops total = 0;

  double gflops() const { return static_cast<double>(total) / 1e9; }
};

inline ModelFlops model_flops(const ModelCostConfig& m) {
  ModelFlops out;
  out.name = m.name;
  Flops neck = 0;
  for (const auto& c : m.neck) neck += c.flops();
  const auto dec = decoder_flops(m.decoder);
  out.stages = {{"patch_embed", m.patch_embed.flops()},
                {"encoder", encoder_flops(m.encoder)},
                {"neck", neck},
                {"decoder.transformer", dec.transformer},
                {"decoder.deconv", dec.deconv},
                {"decoder.mlps", dec.mlps},
                {"decoder.mask_product", dec.mask_product}};
  for (const auto& s : out.stages) out.total += s.flops;
  return out;
}

// ---------------------------------------------------------------------------
// Presets

namespace detail {

/// Mask decoder of the foveated model: per-token 1x1 feature maps grow to
/// patch_size x patch_size through 2x2 stride-2 deconvolutions.
inline DecoderCostConfig foveated_decoder(int image_tokens, int n_masks = 3, int patch_size = 16) {
  DecoderCostConfig d;
  d.n_queries = n_masks + 1;
  d.n_context = image_tokens + 1;  // plus register
  d.n_masks = n_masks;
  // SAM's first upscaling step divides channels by four; each further step
  // halves them.
  int c = d.d_model / 4;
  int prev = d.d_model;
  for (int res = 2; res <= patch_size; res *= 2) {
    d.deconvs.push_back({prev, c, res, res, 2, image_tokens});
    prev = c;
    c /= 2;
  }
  d.mask_channels = prev;
  d.hyper_mlp = {d.d_model, d.d_model, d.d_model, prev};
  d.iou_head = {d.d_model, 256, 256, n_masks};
  d.mask_pixels = static_cast<std::uint64_t>(image_tokens) * patch_size * patch_size;
  return d;
}

inline DecoderCostConfig sam_decoder() {
  DecoderCostConfig d;
  d.n_masks = 4;               // three multimask outputs plus the single-mask token
  d.n_queries = d.n_masks + 1 + 2;  // + IoU token + point and padding prompt tokens
  d.n_context = 64 * 64;
  d.deconvs = {{256, 64, 128, 128, 2, 1}, {64, 32, 256, 256, 2, 1}};
  d.mask_channels = 32;
  d.hyper_mlp = {256, 256, 256, 32};
  d.iou_head = {256, 256, 256, 4};
  d.mask_pixels = 256ull * 256ull;
  return d;
}

inline ModelCostConfig foveated_model(const std::string& name, int d_model, int n_layers, int n_head) {
  constexpr int kTokens = 172;
  ModelCostConfig m;
  m.name = name;
  m.patch_embed = {PatchEmbedSpec::Kind::kLinear, kTokens, 16 * 16 * 3, d_model, 0, 0};
  m.encoder = {d_model, d_model, 4 * d_model, n_head, n_layers, kTokens + 1, std::nullopt};
  m.decoder = foveated_decoder(kTokens);
  return m;
}

inline ModelCostConfig sam_model(const std::string& name, int d_model, int n_layers, int n_head,
                                 std::vector<int> global_layers) {
  ModelCostConfig m;
  m.name = name;
  m.patch_embed = {PatchEmbedSpec::Kind::kConv, 0, 3, d_model, 64, 16};
  m.encoder = {d_model, d_model, 4 * d_model, n_head, n_layers, 64 * 64,
               WindowConfig{14, 64, std::move(global_layers)}};
  m.neck = {{d_model, 256, 64, 64, 1, 1}, {256, 256, 64, 64, 3, 1}};
  m.decoder = sam_decoder();
  return m;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  return {"stt-b", "stt-l", "stt-h", "sam-b", "sam-l", "sam-h"};
}

/// Built-in preset definitions; the files under presets/ mirror these.
inline ModelCostConfig builtin_preset(const std::string& name) {
  if (name == "stt-b") return detail::foveated_model("STT-B", 768, 12, 12);
  if (name == "stt-l") return detail::foveated_model("STT-L", 1024, 24, 16);
  if (name == "stt-h") return detail::foveated_model("STT-H", 1280, 32, 16);
  if (name == "sam-b") return detail::sam_model("SAM-B", 768, 12, 12, {2, 5, 8, 11});
  if (name == "sam-l") return detail::sam_model("SAM-L", 1024, 24, 16, {5, 11, 17, 23});
  if (name == "sam-h") return detail::sam_model("SAM-H", 1280, 32, 16, {7, 15, 23, 31});
  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw InputError("unknown preset \"" + name + "\" (valid presets: " + valid + ")");
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const WindowConfig& w) {
  j = {{"window", w.window}, {"map_side", w.map_side}, {"global_layers", w.global_layers}};
}
inline void from_json(const nlohmann::json& j, WindowConfig& w) {
  j.at("window").get_to(w.window);
  j.at("map_side").get_to(w.map_side);
  j.at("global_layers").get_to(w.global_layers);
}

inline void to_json(nlohmann::json& j, const CostConfig& c) {
  j = {{"d_model", c.d_model}, {"d_attn", c.d_attn}, {"d_ff", c.d_ff},
       {"n_head", c.n_head},   {"n_layers", c.n_layers}, {"n_tokens", c.n_tokens}};
  if (c.window) j["window"] = *c.window;
}
inline void from_json(const nlohmann::json& j, CostConfig& c) {
  j.at("d_model").get_to(c.d_model);
  j.at("d_attn").get_to(c.d_attn);
  j.at("d_ff").get_to(c.d_ff);
  j.at("n_head").get_to(c.n_head);
  j.at("n_layers").get_to(c.n_layers);
  j.at("n_tokens").get_to(c.n_tokens);
  c.window.reset();
  if (j.contains("window")) c.window = j.at("window").get<WindowConfig>();
}

inline void to_json(nlohmann::json& j, const ConvSpec& c) {
  j = {{"d_in", c.d_in}, {"d_out", c.d_out}, {"w_out", c.w_out},
       {"h_out", c.h_out}, {"kernel", c.kernel}, {"repeat", c.repeat}};
}
inline void from_json(const nlohmann::json& j, ConvSpec& c) {
  j.at("d_in").get_to(c.d_in);
  j.at("d_out").get_to(c.d_out);
  j.at("w_out").get_to(c.w_out);
  j.at("h_out").get_to(c.h_out);
  j.at("kernel").get_to(c.kernel);
  c.repeat = j.value("repeat", 1);
}

inline void to_json(nlohmann::json& j, const PatchEmbedSpec& p) {
  if (p.kind == PatchEmbedSpec::Kind::kLinear) {
    j = {{"type", "linear"}, {"n_vals", p.n_vals}, {"d_in", p.d_in}, {"d_out", p.d_out}};
  } else {
    j = {{"type", "conv"}, {"d_in", p.d_in}, {"d_out", p.d_out}, {"map_side", p.map_side}, {"kernel", p.kernel}};
  }
}
inline void from_json(const nlohmann::json& j, PatchEmbedSpec& p) {
  const auto type = j.at("type").get<std::string>();
  p = {};
  if (type == "linear") {
    p.kind = PatchEmbedSpec::Kind::kLinear;
    j.at("n_vals").get_to(p.n_vals);
  } else if (type == "conv") {
    p.kind = PatchEmbedSpec::Kind::kConv;
    j.at("map_side").get_to(p.map_side);
    j.at("kernel").get_to(p.kernel);
  } else {
    throw InputError("unknown patch_embed type \"" + type + "\"");
  }
  j.at("d_in").get_to(p.d_in);
  j.at("d_out").get_to(p.d_out);
}

inline void to_json(nlohmann::json& j, const DecoderCostConfig& d) {
  j = {{"d_model", d.d_model},     {"depth", d.depth},         {"n_head", d.n_head},
       {"attn_downsample", d.attn_downsample}, {"mlp_dim", d.mlp_dim}, {"n_queries", d.n_queries},
       {"n_context", d.n_context}, {"n_masks", d.n_masks},     {"hyper_mlp", d.hyper_mlp},
       {"iou_head", d.iou_head},   {"deconvs", d.deconvs},     {"mask_pixels", d.mask_pixels},
       {"mask_channels", d.mask_channels}};
}
inline void from_json(const nlohmann::json& j, DecoderCostConfig& d) {
  j.at("d_model").get_to(d.d_model);
  j.at("depth").get_to(d.depth);
  j.at("n_head").get_to(d.n_head);
  j.at("attn_downsample").get_to(d.attn_downsample);
  j.at("mlp_dim").get_to(d.mlp_dim);
  j.at("n_queries").get_to(d.n_queries);
  j.at("n_context").get_to(d.n_context);
  j.at("n_masks").get_to(d.n_masks);
  j.at("hyper_mlp").get_to(d.hyper_mlp);
  j.at("iou_head").get_to(d.iou_head);
  j.at("deconvs").get_to(d.deconvs);
  j.at("mask_pixels").get_to(d.mask_pixels);
  j.at("mask_channels").get_to(d.mask_channels);
}

inline void to_json(nlohmann::json& j, const ModelCostConfig& m) {
  j = {{"name", m.name}, {"patch_embed", m.patch_embed}, {"encoder", m.encoder},
       {"neck", m.neck}, {"decoder", m.decoder}};
}
inline void from_json(const nlohmann::json& j, ModelCostConfig& m) {
  j.at("name").get_to(m.name);
  j.at("patch_embed").get_to(m.patch_embed);
  j.at("encoder").get_to(m.encoder);
  m.neck = j.value("neck", std::vector<ConvSpec>{});
  j.at("decoder").get_to(m.decoder);
}

inline ModelCostConfig parse_model_config(const std::string& text) {
  try {
    auto m = nlohmann::json::parse(text).get<ModelCostConfig>();
    check(m.encoder);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed cost config: ") + e.what());
  }
}

inline ModelCostConfig load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_config(ss.str());
}

/// Reads `<dir>/<name>.json` when it exists, otherwise the built-in preset.
inline ModelCostConfig load_preset(const std::string& name, const std::string& dir = {}) {
  const auto builtin = builtin_preset(name);  // validates the name
  if (!dir.empty()) {
    const std::string path = dir + "/" + name + ".json";
    if (std::ifstream(path).good()) return load_model_config(path);
  }
  return builtin;
}

inline nlohmann::json flops_report(const ModelFlops& f) {
  nlohmann::json j;
  j["model"] = f.name;
  j["total_flops"] = f.total;
  j["total_gflops"] = f.gflops();
  for (const auto& s : f.stages) j["stages"].push_back({{"stage", s.stage}, {"flops", s.flops}});
  return j;
}

}  // namespace fovtok::cost

#endif  // FOVTOK_COSTMODEL_HPP

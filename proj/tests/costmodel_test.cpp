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

#include <cmath>

#include <gtest/gtest.h>

#include "fovtok/costmodel.hpp"

namespace fovtok::cost {
namespace {

// Independent transcription of the per-layer expressions, in doubles.
double LayerOracle(double d_model, double d_attn, double d_ff, double heads, double nq, double nk) {
  const double qkv = 2 * d_model * d_attn * (nq + 2 * nk);
  const double logits = 2 * nq * nk * d_attn;
  const double softmax = 3 * nq * nk * heads;
  const double reduce = 2 * nq * nk * d_attn;
  const double project = 2 * nq * d_model * d_attn;
  const double ff = 4 * nq * d_model * d_ff;
  return qkv + logits + softmax + reduce + project + ff;
}

CostConfig Base() { return CostConfig{768, 768, 3072, 12, 12, 173, std::nullopt}; }

TEST(CostFormulaTest, AttentionLayerMatchesHandExpression) {
  const auto cfg = Base();
  const Flops f = attention_layer_flops(cfg, 173, 173);
  EXPECT_EQ(f, 2541968580u);
  EXPECT_DOUBLE_EQ(static_cast<double>(f), LayerOracle(768, 768, 3072, 12, 173, 173));
  EXPECT_NEAR(static_cast<double>(f), 2.546e9, 0.005 * 2.546e9);
}

TEST(CostFormulaTest, UnitDimensions) {
  const CostConfig unit{1, 1, 1, 1, 1, 1, std::nullopt};
  EXPECT_EQ(attention_layer_flops(unit, 1, 1), 19u);
  const auto a = attention_flops(1, 1, 1, 1, 1);
  EXPECT_EQ(a.qkv, 6u);
  EXPECT_EQ(a.logits, 2u);
  EXPECT_EQ(a.softmax, 3u);
  EXPECT_EQ(a.reduce, 2u);
  EXPECT_EQ(a.project, 2u);
}

TEST(CostFormulaTest, CrossAttentionSeparatesQueriesAndKeys) {
  const auto cfg = Base();
  EXPECT_DOUBLE_EQ(static_cast<double>(attention_layer_flops(cfg, 5, 4096)), LayerOracle(768, 768, 3072, 12, 5, 4096));
  EXPECT_NE(attention_layer_flops(cfg, 5, 4096), attention_layer_flops(cfg, 4096, 5));
}

TEST(CostFormulaTest, PairwiseTermsQuadrupleWithTokenCount) {
  const auto a = attention_flops(768, 768, 12, 100, 100);
  const auto b = attention_flops(768, 768, 12, 200, 200);
  EXPECT_EQ(b.logits, 4 * a.logits);
  EXPECT_EQ(b.softmax, 4 * a.softmax);
  EXPECT_EQ(b.reduce, 4 * a.reduce);
  EXPECT_EQ(b.qkv, 2 * a.qkv);
  EXPECT_EQ(b.project, 2 * a.project);
}

TEST(CostFormulaTest, LinearAndConv) {
  EXPECT_EQ(linear_flops(1, 2, 3), 12u);
  EXPECT_EQ(conv_flops(3, 768, 64, 64, 16, 16), 4831838208u);
  EXPECT_EQ(conv_flops(32, 8, 32, 32, 2, 2), 2097152u);
  EXPECT_EQ(mlp_flops({4, 8, 2}), 2u * 4 * 8 + 2u * 8 * 2);
}

TEST(CostFormulaTest, EncoderIsLinearInLayers) {
  auto cfg = Base();
  const Flops one = encoder_flops(cfg) / 12;
  cfg.n_layers = 24;
  EXPECT_EQ(encoder_flops(cfg), 24 * one);
}

TEST(WindowedEncoderTest, WindowCountAndCost) {
  EXPECT_EQ(window_count({14, 64, {}}), 25u);
  EXPECT_EQ(window_count({16, 64, {}}), 16u);
  auto cfg = Base();
  cfg.window = WindowConfig{14, 64, {2, 5, 8, 11}};
  const double global = LayerOracle(768, 768, 3072, 12, 4096, 4096);
  const double local = 25 * LayerOracle(768, 768, 3072, 12, 196, 196);
  const double body = 4 * global + 8 * local;
  EXPECT_DOUBLE_EQ(static_cast<double>(windowed_encoder_flops(cfg)), body);
  EXPECT_NEAR(body, 1.02e12, 0.02e12);

  // A window covering the whole map costs the same as global attention.
  cfg.window = WindowConfig{64, 64, {}};
  auto global_cfg = Base();
  global_cfg.n_tokens = 4096;
  EXPECT_EQ(windowed_encoder_flops(cfg), encoder_flops(global_cfg));
  EXPECT_THROW(windowed_encoder_flops(Base()), InputError);
}

TEST(CostConfigTest, Validation) {
  auto c = Base();
  c.n_head = 7;
  EXPECT_THROW(check(c), InputError);
  c = Base();
  c.d_model = 0;
  EXPECT_THROW(check(c), InputError);
  c = Base();
  c.window = WindowConfig{14, 64, {12}};
  EXPECT_THROW(check(c), InputError);
}

struct ReferenceRow {
  const char* preset;
  double gflops;
  double tolerance;
};

TEST(ModelFlopsTest, ReproducesReportedTotals) {
  for (const ReferenceRow& r : {ReferenceRow{"stt-b", 30.9, 0.02}, ReferenceRow{"stt-l", 108.0, 0.02}, ReferenceRow{"stt-h", 223.2, 0.02},
                            ReferenceRow{"sam-b", 1027.0, 0.05}, ReferenceRow{"sam-l", 3244.5, 0.05},
                            ReferenceRow{"sam-h", 6533.7, 0.05}}) {
    const auto f = model_flops(builtin_preset(r.preset));
    EXPECT_NEAR(f.gflops(), r.gflops, r.tolerance * r.gflops) << r.preset;
  }
}

TEST(ModelFlopsTest, StagesAreAdditive) {
  for (const auto& name : preset_names()) {
    const auto f = model_flops(builtin_preset(name));
    Flops sum = 0;
    for (const auto& s : f.stages) sum += s.flops;
    EXPECT_EQ(sum, f.total) << name;
    EXPECT_EQ(f.stages.size(), 7u);
  }
}

TEST(ModelFlopsTest, FoveatedEncoderUsesRegisterToken) {
  const auto m = builtin_preset("stt-b");
  EXPECT_EQ(m.encoder.n_tokens, 173);
  EXPECT_EQ(m.patch_embed.flops(), linear_flops(172, 768, 768));
  const auto f = model_flops(m);
  EXPECT_EQ(f.stages[1].flops, 12 * attention_layer_flops(m.encoder, 173, 173));
  // Four deconvolutions take 1x1 per-token maps to 16x16.
  EXPECT_EQ(m.decoder.deconvs.size(), 4u);
  EXPECT_EQ(m.decoder.deconvs.back().w_out, 16);
}

TEST(PresetTest, FilesMirrorBuiltins) {
  const std::string dir = std::string(FOVTOK_SOURCE_DIR) + "/presets";
  for (const auto& name : preset_names()) {
    EXPECT_EQ(load_model_config(dir + "/" + name + ".json"), builtin_preset(name)) << name;
    EXPECT_EQ(load_preset(name, dir), builtin_preset(name));
  }
}

TEST(PresetTest, UnknownPresetListsValidNames) {
  try {
    builtin_preset("sam-xl");
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    for (const auto& name : preset_names()) EXPECT_NE(msg.find(name), std::string::npos) << msg;
  }
}

TEST(PresetTest, JsonRoundTrip) {
  for (const auto& name : preset_names()) {
    const auto m = builtin_preset(name);
    EXPECT_EQ(parse_model_config(nlohmann::json(m).dump()), m);
  }
  EXPECT_THROW(parse_model_config("{\"name\": 3}"), InputError);
  const auto r = flops_report(model_flops(builtin_preset("stt-b")));
  EXPECT_EQ(r["model"], "STT-B");
  EXPECT_EQ(r["stages"].size(), 7u);
}

}  // namespace
}  // namespace fovtok::cost

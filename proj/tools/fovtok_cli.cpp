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

// fovtok command-line tool.
//
// Exit codes: 0 success, 1 a check failed, 2 usage or input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fovtok.hpp"

namespace {

using namespace fovtok;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

FoveationPattern pattern_or_default(const std::string& path) {
  return path.empty() ? default_pattern() : load_pattern(path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string join(const std::vector<std::int64_t>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : ", ") + std::to_string(x);
  return s;
}

// ---------------------------------------------------------------------------

int pattern_info(const std::string& config) {
  const auto p = pattern_or_default(config);
  std::printf("patch_size: %d\n", p.patch_size);
  const auto kept = tokens_per_level(p);
  const auto bp = stride_breakpoints(p);
  for (std::size_t i = 0; i < p.levels.size(); ++i) {
    std::printf("level %zu: stride %d, grid %d, kept tokens %lld, half-extent %g px\n", i, p.levels[i].stride,
                p.levels[i].grid, static_cast<long long>(kept[i]), bp[i]);
  }
  std::printf("tokens per level: [%s]\n", join(kept).c_str());
  std::printf("tokens: %lld, side: %d, pixels: %lld\n", static_cast<long long>(token_count(p)), pattern_size(p),
              static_cast<long long>(pixel_count(p)));
  return kOk;
}

int pattern_validate(const std::string& config) {
  std::ifstream in(config);
  if (!in) throw IoError("cannot open " + config);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto p = parse_pattern(text);  // throws with the violated constraints
  std::printf("ok: %lld tokens, side %d\n", static_cast<long long>(token_count(p)), pattern_size(p));
  return kOk;
}

int tokenize_cmd(const std::string& image, int x, int y, const std::string& config, const std::string& out) {
  const auto p = pattern_or_default(config);
  const auto img = read_pnm(image);
  const auto tokens = tokenize(img, {x, y}, p);
  write_tokens(out, tokens);
  std::printf("wrote %zu tokens (%zu valid), %zu bytes to %s\n", tokens.token_count(), tokens.valid_count(),
              token_file_size(tokens.token_count(), p.patch_size, tokens.channels), out.c_str());
  return kOk;
}

int render_cmd(const std::string& tokens_path, const std::string& out, const std::string& mode,
               const std::string& config) {
  const auto p = pattern_or_default(config);
  const auto tokens = read_tokens(tokens_path, p);
  const auto img = quantize(detokenize(tokens, parse_interp(mode)));
  write_pnm(out, img);
  std::printf("wrote %dx%d image to %s\n", img.width(), img.height(), out.c_str());
  return kOk;
}

int downsample_cmd(const std::string& mask_path, int x, int y, const std::string& config, const std::string& out,
                   const std::string& render) {
  const auto p = pattern_or_default(config);
  const auto mask = read_pnm(mask_path);
  const auto fm = downsample_mask(mask, Point{x, y}, p);
  TokenTensor t{p, 1, fm.data, fm.valid};
  for (auto& v : t.data) v *= 255.0;
  if (!out.empty()) write_tokens(out, t);
  if (!render.empty()) write_pnm(render, quantize(detokenize(t, Interp::kNearest)));
  std::printf("downsampled %zu tokens (%zu valid)\n", t.token_count(), t.valid_count());
  return kOk;
}

int flops_cmd(const std::string& preset, const std::string& report, const std::string& dir) {
  const auto cfg = cost::load_preset(preset, dir);
  const auto f = cost::model_flops(cfg);
  std::printf("%s\n", f.name.c_str());
  for (const auto& s : f.stages) std::printf("  %-22s %12.2f GFLOPs\n", s.stage.c_str(), static_cast<double>(s.flops) / 1e9);
  std::printf("  %-22s %12.2f GFLOPs\n", "total", f.gflops());
  if (!report.empty()) write_text(report, cost::flops_report(f).dump(2) + "\n");
  return kOk;
}

struct EvalArgs {
  std::string manifest, config, model = "oracle", report, csv;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  int threads = 0;
};

int eval_cmd(const EvalArgs& a) {
  const auto p = pattern_or_default(a.config);
  const auto records = read_manifest(a.manifest);
  if (records.empty()) throw InputError("empty manifest");
  Predictor predictor;
  if (a.model == "oracle") {
    predictor = oracle_predictor();
  } else {
    auto model = std::make_shared<const nano::NanoModel>(nano::load_checkpoint(a.model));
    if (!(model->config().pattern == p)) throw InputError("checkpoint pattern does not match --config");
    predictor = model_predictor(model);
  }
  EvalOptions opt;
  opt.sigma = a.sigma;
  opt.seed = a.seed;
  opt.threads = a.threads;
  const auto r = evaluate_dataset(records, p, predictor, opt);
  for (const auto& f : r.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
  std::printf("evaluated: %zu, skipped empty: %zu, failed: %zu\n", r.records.size(), r.skipped_empty,
              r.failures.size());
  std::printf("mIoU: %.4f\n", r.miou);
  if (!a.report.empty()) write_text(a.report, report_json(r).dump(2) + "\n");
  if (!a.csv.empty()) write_text(a.csv, bins_csv(r));
  if (r.records.empty() && r.skipped_empty == 0) return kUsage;
  return kOk;
}

int nano_gradcheck(std::uint64_t seed) {
  const auto r = nano::grad_check(seed);
  const bool ok = r.max_rel_error < 1e-4;
  std::printf("params %zu, loss %.6f, max abs err %.3e, max rel err %.3e (%s) %s\n", r.params, r.loss,
              r.max_abs_error, r.max_rel_error, r.worst_param.c_str(), ok ? "PASS" : "FAIL");
  return ok ? kOk : kCheckFailed;
}

int nano_overfit(std::uint64_t seed) {
  const auto r = nano::overfit_check(seed);
  const bool ok = r.decreases >= 95;
  std::printf("loss %.6f -> %.6f, strictly decreasing steps %d/%d %s\n", r.first_loss, r.last_loss, r.decreases,
              r.steps, ok ? "PASS" : "FAIL");
  return ok ? kOk : kCheckFailed;
}

int nano_invariance(std::uint64_t seed) {
  const auto r = nano::invariance_check(seed);
  const bool ok = r.failures == 0;
  std::printf("trials %d, invalid tokens mutated %zu, values compared %zu, bit mismatches in %d trials %s\n",
              r.trials, r.invalid_tokens, r.compared_values, r.failures, ok ? "PASS" : "FAIL");
  return ok ? kOk : kCheckFailed;
}

int nano_init(std::uint64_t seed, const std::string& config, const std::string& out) {
  nano::NanoConfig cfg;
  if (!config.empty()) {
    std::ifstream in(config);
    if (!in) throw IoError("cannot open " + config);
    cfg = nlohmann::json::parse(in).get<nano::NanoConfig>();
  }
  cfg.seed = seed;
  const nano::NanoModel model(cfg);
  nano::save_checkpoint(out, model);
  std::printf("wrote %zu parameters to %s\n", model.params().size(), out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Foveated tokenization toolkit"};
  app.require_subcommand(1);
  std::function<int()> action;

  // pattern
  auto* pattern = app.add_subcommand("pattern", "Inspect or validate a foveation pattern");
  pattern->require_subcommand(1);
  std::string pattern_config;
  auto* info = pattern->add_subcommand("info", "Print levels, token counts and stride breakpoints");
  info->add_option("--config", pattern_config, "Pattern config (default: built-in five-level pattern)");
  info->callback([&] { action = [&] { return pattern_info(pattern_config); }; });
  auto* validate_cmd = pattern->add_subcommand("validate", "Check a pattern config");
  validate_cmd->add_option("--config", pattern_config, "Pattern config")->required();
  validate_cmd->callback([&] { action = [&] { return pattern_validate(pattern_config); }; });

  // tokenize
  std::string image, out, config, tokens_path, mode = "nearest", mask_path, render_out;
  int px = 0, py = 0;
  auto* tok = app.add_subcommand("tokenize", "Write the FTOK tokens of an image around a prompt");
  tok->add_option("--image", image, "Input PGM/PPM")->required();
  tok->add_option("--x", px, "Prompt x")->required();
  tok->add_option("--y", py, "Prompt y")->required();
  tok->add_option("--config", config, "Pattern config");
  tok->add_option("--out", out, "Output FTOK file")->required();
  tok->callback([&] { action = [&] { return tokenize_cmd(image, px, py, config, out); }; });

  auto* render = app.add_subcommand("render", "Reassemble an FTOK file into an image");
  render->add_option("--tokens", tokens_path, "Input FTOK file")->required();
  render->add_option("--out", out, "Output PGM/PPM")->required();
  render->add_option("--mode", mode, "nearest or bilinear")->check(CLI::IsMember({"nearest", "bilinear"}));
  render->add_option("--config", config, "Pattern config");
  render->callback([&] { action = [&] { return render_cmd(tokens_path, out, mode, config); }; });

  auto* down = app.add_subcommand("downsample", "Map a binary mask into foveated space");
  down->add_option("--mask", mask_path, "Input PGM mask")->required();
  down->add_option("--x", px, "Prompt x")->required();
  down->add_option("--y", py, "Prompt y")->required();
  down->add_option("--config", config, "Pattern config");
  down->add_option("--out", out, "Output FTOK file (coverage scaled to 0..255)");
  down->add_option("--render", render_out, "Output PGM of the reassembled map");
  down->callback([&] { action = [&] { return downsample_cmd(mask_path, px, py, config, out, render_out); }; });

  // eval
  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Single-point evaluation over a manifest");
  eval->add_option("--manifest", ev.manifest, "TSV of image and mask paths")->required();
  eval->add_option("--config", ev.config, "Pattern config");
  eval->add_option("--model", ev.model, "Checkpoint path or 'oracle'");
  eval->add_option("--sigma", ev.sigma, "Prompt jitter in pixels")->check(CLI::NonNegativeNumber);
  eval->add_option("--seed", ev.seed, "Jitter seed");
  eval->add_option("--threads", ev.threads, "Worker threads (default FOVTOK_THREADS or all cores)");
  eval->add_option("--report", ev.report, "JSON report path");
  eval->add_option("--csv", ev.csv, "CSV of distance-binned curves");
  eval->callback([&] { action = [&] { return eval_cmd(ev); }; });

  // flops
  std::string preset, report, preset_dir;
  auto* flops = app.add_subcommand("flops", "FLOPs breakdown of a model preset");
  flops->add_option("--preset", preset, "stt-b|stt-l|stt-h|sam-b|sam-l|sam-h")->required();
  flops->add_option("--report", report, "JSON report path");
  flops->add_option("--preset-dir", preset_dir, "Directory of preset JSON overrides");
  flops->callback([&] { action = [&] { return flops_cmd(preset, report, preset_dir); }; });

  // nano
  std::uint64_t seed = 0;
  std::string nano_config;
  auto* nano_cmd = app.add_subcommand("nano", "Checks of the miniature network");
  nano_cmd->require_subcommand(1);
  auto* gc = nano_cmd->add_subcommand("gradcheck", "Analytic vs finite-difference gradients");
  auto* of = nano_cmd->add_subcommand("overfit", "100 AdamW steps on one example");
  auto* inv = nano_cmd->add_subcommand("invariance", "Out-of-image token mutation test");
  auto* init = nano_cmd->add_subcommand("init", "Write a freshly initialized checkpoint");
  for (auto* c : {gc, of, inv, init}) c->add_option("--seed", seed, "Random seed");
  init->add_option("--config", nano_config, "Model config JSON");
  init->add_option("--out", out, "Checkpoint path")->required();
  gc->callback([&] { action = [&] { return nano_gradcheck(seed); }; });
  of->callback([&] { action = [&] { return nano_overfit(seed); }; });
  inv->callback([&] { action = [&] { return nano_invariance(seed); }; });
  init->callback([&] { action = [&] { return nano_init(seed, nano_config, out); }; });

  // synth
  std::string synth_dir;
  int synth_count = 50;
  auto* synth = app.add_subcommand("synth", "Write a synthetic evaluation set");
  synth->add_option("--out", synth_dir, "Output directory")->required();
  synth->add_option("--count", synth_count, "Number of segments")->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "Random seed");
  synth->callback([&] {
    action = [&] {
      std::printf("%s\n", write_synthetic_dataset(synth_dir, synth_count, seed).c_str());
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    return action();
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kCheckFailed;
  }
}

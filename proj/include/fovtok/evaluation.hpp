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

// Single-point valid-mask evaluation.
//
// For every (image, mask) record: upscale both so the shorter side covers
// the crop, place the prompt at the mask's innermost pixel (optionally
// jittered), tokenize, run a predictor, keep the mask with the highest
// predicted IoU, reproject it to image space and score it at 0.5 against
// the ground truth. Pixel counts are also pooled into 4 px radial-distance
// bins around the prompt.

#ifndef FOVTOK_EVALUATION_HPP
#define FOVTOK_EVALUATION_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fovtok/error.hpp"
#include "fovtok/image.hpp"
#include "fovtok/nano/model.hpp"
#include "fovtok/pattern.hpp"
#include "fovtok/prompt.hpp"
#include "fovtok/reproject.hpp"
#include "fovtok/tokenizer.hpp"

namespace fovtok {

using nano::ModelOutput;

inline constexpr int kDistanceBinWidth = 4;
inline constexpr double kEvalThreshold = 0.5;

struct ManifestRecord {
  std::string image;
  std::string mask;
};

/// Tab-separated image and mask paths, one record per line. Relative paths
/// resolve against the manifest's directory; blank lines and lines starting
/// with '#' are ignored.
inline std::vector<ManifestRecord> parse_manifest(std::istream& in, const std::filesystem::path& base = {}) {
  std::vector<ManifestRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw InputError("manifest line " + std::to_string(lineno) + ": expected two tab-separated fields");
    }
    auto resolve = [&](std::string p) {
      std::filesystem::path path(p);
      return (path.is_relative() && !base.empty() ? base / path : path).string();
    };
    out.push_back({resolve(line.substr(0, tab)), resolve(line.substr(tab + 1))});
  }
  return out;
}

inline std::vector<ManifestRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  return parse_manifest(in, std::filesystem::path(path).parent_path());
}

/// What a predictor may see besides the tokens. The ground truth is exposed
/// only so that the oracle predictor can be expressed as a predictor.
struct SegmentContext {
  Placement placement;
  const ImageU8* ground_truth = nullptr;  // upscaled, binary
};

using Predictor = std::function<ModelOutput(const TokenTensor&, const SegmentContext&)>;

inline double logit(double p, double clamp = 1e-6) {
  p = std::clamp(p, clamp, 1.0 - clamp);
  return std::log(p / (1.0 - p));
}

/// Returns the logits of the downsampled ground truth as its single mask.
inline Predictor oracle_predictor() {
  return [](const TokenTensor& tokens, const SegmentContext& ctx) {
    if (ctx.ground_truth == nullptr) throw Error("oracle predictor needs the ground truth");
    FoveatedMask m = downsample_mask(*ctx.ground_truth, ctx.placement, tokens.pattern);
    for (std::size_t k = 0; k < m.token_count(); ++k) {
      const std::size_t per = m.token_stride();
      for (std::size_t i = 0; i < per; ++i) m.data[k * per + i] = m.valid[k] ? logit(m.data[k * per + i]) : 0.0;
    }
    return ModelOutput{{std::move(m)}, {1.0}};
  };
}

/// Every logit set to `value`.
inline Predictor constant_predictor(double value, int n_masks = 1) {
  return [value, n_masks](const TokenTensor& tokens, const SegmentContext&) {
    ModelOutput out;
    for (int i = 0; i < n_masks; ++i) {
      FoveatedMask m = make_foveated_mask(tokens.pattern, tokens.valid);
      std::fill(m.data.begin(), m.data.end(), value);
      out.masks.push_back(std::move(m));
      out.iou_pred.push_back(0.0);
    }
    return out;
  };
}

/// Gray inputs are replicated for three-channel models; color inputs are
/// averaged for one-channel models.
inline TokenTensor adapt_channels(const TokenTensor& t, int channels) {
  if (t.channels == channels) return t;
  TokenTensor out{t.pattern, channels, {}, t.valid};
  const std::size_t samples = t.data.size() / static_cast<std::size_t>(t.channels);
  out.data.resize(samples * static_cast<std::size_t>(channels));
  for (std::size_t i = 0; i < samples; ++i) {
    double mean = 0.0;
    for (int c = 0; c < t.channels; ++c) mean += t.data[i * t.channels + c];
    mean /= t.channels;
    for (int c = 0; c < channels; ++c) {
      out.data[i * channels + c] = t.channels == 1 ? t.data[i] : mean;
    }
  }
  return out;
}

inline Predictor model_predictor(std::shared_ptr<const nano::NanoModel> model) {
  return [model](const TokenTensor& tokens, const SegmentContext&) {
    return model->predict(adapt_channels(tokens, model->config().channels));
  };
}

/// Scale factor max(1, side / min(H, W)) and the resulting dimensions. The
/// shorter side lands exactly on `side` when upscaling.
struct UpscalePlan {
  double factor = 1.0;
  int width = 0;
  int height = 0;
};

inline UpscalePlan upscale_plan(int width, int height, int side) {
  const int shorter = std::min(width, height);
  if (shorter >= side) return {1.0, width, height};
  const double f = static_cast<double>(side) / shorter;
  UpscalePlan p{f, static_cast<int>(std::lround(width * f)), static_cast<int>(std::lround(height * f))};
  (width <= height ? p.width : p.height) = side;
  return p;
}

struct BinCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  BinCounts& operator+=(const BinCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  std::uint64_t total() const { return tp + fp + fn + tn; }
  static double ratio(std::uint64_t a, std::uint64_t b) {
    return b == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(a) / static_cast<double>(b);
  }
  double precision() const { return ratio(tp, tp + fp); }
  double recall() const { return ratio(tp, tp + fn); }
  double accuracy() const { return ratio(tp + tn, total()); }
  double positive_rate() const { return ratio(tp + fn, total()); }
};

/// Pixel confusion counts binned by floor(distance to prompt / bin_width).
inline std::vector<BinCounts> distance_bins(const ImageF& prob, const ImageU8& gt, Point prompt,
                                            double threshold = kEvalThreshold, int bin_width = kDistanceBinWidth) {
  std::vector<BinCounts> bins;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      const double dx = x - prompt.x;
      const double dy = y - prompt.y;
      const auto b = static_cast<std::size_t>(std::sqrt(dx * dx + dy * dy) / bin_width);
      if (b >= bins.size()) bins.resize(b + 1);
      const bool p = prob(x, y) > threshold;
      const bool g = gt(x, y, 0) != 0;
      auto& c = bins[b];
      (p ? (g ? c.tp : c.fp) : (g ? c.fn : c.tn)) += 1;
    }
  }
  return bins;
}

struct EvalOptions {
  double threshold = kEvalThreshold;
  double sigma = 0.0;  // prompt jitter in upscaled pixels
  std::uint64_t seed = 0;
  int threads = 0;  // 0: FOVTOK_THREADS or hardware concurrency
  int bin_width = kDistanceBinWidth;
};

struct EvalRecord {
  std::string image;
  std::string mask;
  Point prompt{};  // upscaled image coordinates
  double scale = 1.0;
  std::vector<double> ious;  // one per predicted mask
  std::size_t selected = 0;
  double iou = 0.0;
};

struct EvalReport {
  double miou = 0.0;
  std::vector<EvalRecord> records;
  std::size_t skipped_empty = 0;
  std::vector<std::string> failures;  // "path: reason"
  std::vector<BinCounts> bins;
  int bin_width = kDistanceBinWidth;
};

enum class RecordStatus { kOk, kEmpty, kFailed };

struct RecordResult {
  RecordStatus status = RecordStatus::kFailed;
  EvalRecord record;
  std::vector<BinCounts> bins;
  std::string error;
};

inline RecordResult evaluate_record(const ManifestRecord& rec, std::size_t index, const FoveationPattern& pattern,
                                    const Predictor& predict, const EvalOptions& opt) {
  RecordResult out;
  out.record.image = rec.image;
  out.record.mask = rec.mask;
  try {
    const ImageU8 image = read_pnm(rec.image);
    ImageU8 mask = binarize(read_pnm(rec.mask));
    if (image.width() != mask.width() || image.height() != mask.height()) {
      throw InputError("mask dimension mismatch");
    }
    if (std::none_of(mask.data().begin(), mask.data().end(), [](std::uint8_t v) { return v != 0; })) {
      out.status = RecordStatus::kEmpty;
      return out;
    }
    const int side = pattern_size(pattern);
    const auto plan = upscale_plan(image.width(), image.height(), side);
    ImageF img = plan.factor > 1.0 ? resize_bilinear(image, plan.width, plan.height) : to_real(image);
    if (plan.factor > 1.0) mask = resize_nearest(mask, plan.width, plan.height);

    Point prompt = select_prompt(mask);
    Rng rng(opt.seed + index);
    prompt = perturb_prompt(prompt, opt.sigma, mask.width(), mask.height(), rng);

    const auto tokens = tokenize(img, prompt, pattern);
    const SegmentContext ctx{make_placement(mask.width(), mask.height(), prompt, pattern), &mask};
    const auto pred = predict(tokens, ctx);
    if (pred.masks.empty() || pred.masks.size() != pred.iou_pred.size()) {
      throw Error("predictor returned inconsistent masks");
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < pred.iou_pred.size(); ++i)
      if (pred.iou_pred[i] > pred.iou_pred[best]) best = i;
    ImageF best_prob;
    for (std::size_t i = 0; i < pred.masks.size(); ++i) {
      ImageF prob = reproject_mask(sigmoid(pred.masks[i]), ctx.placement, Interp::kBilinear);
      out.record.ious.push_back(binary_iou(prob, mask, opt.threshold));
      if (i == best) best_prob = std::move(prob);
    }
    out.record.prompt = prompt;
    out.record.scale = plan.factor;
    out.record.selected = best;
    out.record.iou = out.record.ious[best];
    out.bins = distance_bins(best_prob, mask, prompt, opt.threshold, opt.bin_width);
    out.status = RecordStatus::kOk;
  } catch (const std::exception& e) {
    out.status = RecordStatus::kFailed;
    out.error = e.what();
  }
  return out;
}

inline int eval_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FOVTOK_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Records are processed concurrently; results are merged in manifest order,
/// so the report does not depend on the thread count.
inline EvalReport evaluate_dataset(const std::vector<ManifestRecord>& manifest, const FoveationPattern& pattern,
                                   const Predictor& predict, const EvalOptions& opt = {}) {
  if (manifest.empty()) throw InputError("empty manifest");
  require_valid(pattern);
  std::vector<RecordResult> results(manifest.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.size(); i = next++) {
      results[i] = evaluate_record(manifest[i], i, pattern, predict, opt);
    }
  };
  const int n = std::min<int>(eval_threads(opt.threads), static_cast<int>(manifest.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  report.bin_width = opt.bin_width;
  double sum = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    switch (r.status) {
      case RecordStatus::kEmpty: ++report.skipped_empty; break;
      case RecordStatus::kFailed: report.failures.push_back(manifest[i].image + ": " + r.error); break;
      case RecordStatus::kOk:
        if (r.bins.size() > report.bins.size()) report.bins.resize(r.bins.size());
        for (std::size_t b = 0; b < r.bins.size(); ++b) report.bins[b] += r.bins[b];
        sum += r.record.iou;
        report.records.push_back(std::move(r.record));
        break;
    }
  }
  report.miou = report.records.empty() ? 0.0 : sum / static_cast<double>(report.records.size());
  return report;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {
inline nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }
}  // namespace detail

inline nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["miou"] = r.miou;
  j["evaluated"] = r.records.size();
  j["skipped_empty"] = r.skipped_empty;
  j["failures"] = r.failures;
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& rec : r.records) {
    nlohmann::ordered_json e;
    e["image"] = rec.image;
    e["mask"] = rec.mask;
    e["prompt"] = {rec.prompt.x, rec.prompt.y};
    e["scale"] = rec.scale;
    e["ious"] = rec.ious;
    e["selected"] = rec.selected;
    e["iou"] = rec.iou;
    j["records"].push_back(std::move(e));
  }
  j["bin_width"] = r.bin_width;
  j["bins"] = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    const auto& c = r.bins[b];
    nlohmann::ordered_json e;
    e["distance_lo"] = static_cast<int>(b) * r.bin_width;
    e["distance_hi"] = static_cast<int>(b + 1) * r.bin_width;
    e["pixels"] = c.total();
    e["tp"] = c.tp;
    e["fp"] = c.fp;
    e["fn"] = c.fn;
    e["tn"] = c.tn;
    e["precision"] = detail::number_or_null(c.precision());
    e["recall"] = detail::number_or_null(c.recall());
    e["accuracy"] = detail::number_or_null(c.accuracy());
    e["positive_rate"] = detail::number_or_null(c.positive_rate());
    j["bins"].push_back(std::move(e));
  }
  return j;
}

inline std::string bins_csv(const EvalReport& r) {
  std::ostringstream out;
  out.precision(10);
  out << "distance_lo,distance_hi,pixels,precision,recall,accuracy,positive_rate\n";
  auto cell = [&](double v) {
    if (!std::isnan(v)) out << v;
  };
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    const auto& c = r.bins[b];
    out << b * r.bin_width << ',' << (b + 1) * r.bin_width << ',' << c.total() << ',';
    cell(c.precision());
    out << ',';
    cell(c.recall());
    out << ',';
    cell(c.accuracy());
    out << ',';
    cell(c.positive_rate());
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Writes `count` (image, mask) pairs plus manifest.tsv into `dir`. Every
/// segment is a disk, ellipse or axis-aligned box whose upscaled extent stays
/// within `max_upscaled_radius` of its center, over a noisy background.
/// Returns the manifest path.
inline std::string write_synthetic_dataset(const std::string& dir, int count, std::uint64_t seed,
                                           const FoveationPattern& pattern = default_pattern(),
                                           double max_upscaled_radius = 28.0) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Rng rng(seed);
  std::uniform_int_distribution<int> dim(200, 360);
  std::uniform_int_distribution<int> noise(0, 40);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int side = pattern_size(pattern);
  std::ofstream manifest(fs::path(dir) / "manifest.tsv");
  if (!manifest) throw IoError("cannot write manifest in " + dir);
  for (int i = 0; i < count; ++i) {
    const int w = dim(rng);
    const int h = dim(rng);
    const double f = upscale_plan(w, h, side).factor;
    const double rmax = std::max(1.5, max_upscaled_radius / f);
    const double rx = 1.5 + unit(rng) * (rmax - 1.5);
    const double ry = 1.5 + unit(rng) * (rmax - 1.5);
    const int k = kind(rng);
    const double cx = rmax + 2 + unit(rng) * (w - 2 * rmax - 4);
    const double cy = rmax + 2 + unit(rng) * (h - 2 * rmax - 4);
    auto inside = [&](double x, double y) {
      const double dx = (x - cx) / rx;
      const double dy = (y - cy) / (k == 0 ? rx : ry);
      if (k == 2) return std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
      return dx * dx + dy * dy <= 1.0;
    };
    ImageU8 img(w, h, 3);
    ImageU8 mask(w, h, 1);
    const int base[3] = {noise(rng) * 2, noise(rng) * 2, noise(rng) * 2};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool in = inside(x + 0.5, y + 0.5);
        mask(x, y) = in ? 255 : 0;
        for (int c = 0; c < 3; ++c) img(x, y, c) = static_cast<std::uint8_t>(in ? 200 + noise(rng) : base[c] + noise(rng));
      }
    }
    const auto stem = "seg" + std::to_string(i);
    write_pnm((fs::path(dir) / (stem + ".ppm")).string(), img);
    write_pnm((fs::path(dir) / (stem + "_mask.pgm")).string(), mask);
    manifest << stem << ".ppm\t" << stem << "_mask.pgm\n";
  }
  return (fs::path(dir) / "manifest.tsv").string();
}

}  // namespace fovtok

#endif  // FOVTOK_EVALUATION_HPP

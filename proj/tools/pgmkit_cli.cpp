// Copyright 2026 The pgmkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pgmkit command-line front end.
//
// Exit codes: 0 success, 1 computation error, 2 usage or input error.
// Every subcommand parses and validates all inputs before writing a file.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgmkit/frequency.hpp"
#include "pgmkit/losses.hpp"
#include "pgmkit/mask_io.hpp"
#include "pgmkit/metrics.hpp"
#include "pgmkit/parallel.hpp"
#include "pgmkit/pgm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pgmkit;

namespace {

constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs a validation step, reporting precondition failures as usage errors.
template <typename Fn>
void validating(Fn&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw UsageError(std::string("invalid ") + what + ": '" + s + "'");
  return v;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

std::size_t parse_size(const std::string& s, const char* what) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw UsageError(std::string("invalid ") + what + ": '" + s + "'");
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

ComputePath parse_path(const std::string& s) {
  if (s == "exact") return ComputePath::kExact;
  if (s == "separable") return ComputePath::kSeparable;
  if (s == "fft") return ComputePath::kFft;
  throw UsageError("unknown compute path '" + s + "' (exact, separable, fft)");
}

Normalization parse_normalization(const std::string& s) {
  if (s == "raw") return Normalization::kRaw;
  if (s == "max" || s == "max_one") return Normalization::kMaxOne;
  throw UsageError("unknown normalization '" + s + "' (raw, max)");
}

fs::path stack_file(const fs::path& dir, const std::string& prefix, double lambda,
                    const char* ext) {
  return dir / (prefix + "_lambda" + format_number(lambda) + ext);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  io_detail::write_file(path, text);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

// ---------------------------------------------------------------------------
// heatmap

struct HeatmapArgs {
  std::string mask;
  std::string lambdas = "1,5,10,20";
  std::string path = "separable";
  std::string normalize = "max";
  std::string out_dir;
  std::string prefix;
  std::string format = "pfm";
};

int run_heatmap(const HeatmapArgs& a, std::size_t threads) {
  const auto lambdas = parse_double_list(a.lambdas, "lambda");
  const ComputePath path = parse_path(a.path);
  const Normalization norm = parse_normalization(a.normalize);
  validating([&] { validate_lambdas(lambdas); });
  if (a.format != "pfm" && a.format != "gray16")
    throw UsageError("unknown format '" + a.format + "' (pfm, gray16)");
  const bool gray16 = a.format == "gray16";
  if (gray16 && norm == Normalization::kRaw)
    throw UsageError("gray16 output needs --normalize max");
  const LuminanceGrid image = read_grid(a.mask, format_for_path(a.mask));
  const std::string prefix = a.prefix.empty() ? fs::path(a.mask).stem().string() : a.prefix;

  std::vector<std::optional<Heatmap>> maps(lambdas.size());
  std::vector<double> timings(lambdas.size());
  parallel_for(lambdas.size(), threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    maps[i].emplace(normalize_heatmap(compute_pgm(image, lambdas[i], path), norm));
    timings[i] = elapsed_ms(start);
  });

  // Single collector writes every file in lambda order.
  ensure_dir(a.out_dir);
  json files = json::array();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto file = stack_file(a.out_dir, prefix, lambdas[i], gray16 ? ".pgm" : ".pfm");
    write_grid(*maps[i], file, gray16 ? GridFormat::kNetpbmGray16 : GridFormat::kPfmFloat);
    files.push_back(file.filename().string());
  }
  json sidecar = {
      {"mask", fs::path(a.mask).filename().string()},
      {"width", image.width()},
      {"height", image.height()},
      {"lambdas", lambdas},
      {"path", std::string(to_string(path))},
      {"normalization", std::string(to_string(norm))},
      {"files", files},
      {"timings_ms", timings},
  };
  write_text(fs::path(a.out_dir) / (prefix + "_heatmaps.json"), sidecar.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string size = "640x480";
  double lambda = 10.0;
  std::string paths = "separable,fft";
  std::size_t reps = 5;
  std::uint64_t seed = 42;
  std::size_t exact_budget = 128 * 128;
  bool force = false;
};

double unit_draw(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// Random union of ellipses covering roughly a third of the frame.
LuminanceGrid synthetic_mask(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(w * h, 0.0);
  const int blobs = 3 + int(rng() % 4);
  for (int b = 0; b < blobs; ++b) {
    const double cx = unit_draw(rng) * double(w), cy = unit_draw(rng) * double(h);
    const double rx = (0.05 + 0.2 * unit_draw(rng)) * double(w) + 1.0;
    const double ry = (0.05 + 0.2 * unit_draw(rng)) * double(h) + 1.0;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double dx = (double(x) - cx) / rx, dy = (double(y) - cy) / ry;
        if (dx * dx + dy * dy <= 1.0) v[y * w + x] = 1.0;
      }
  }
  return LuminanceGrid(w, h, std::move(v));
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw UsageError("size must look like WxH, got '" + s + "'");
  const std::size_t w = parse_size(s.substr(0, x), "width");
  const std::size_t h = parse_size(s.substr(x + 1), "height");
  if (w == 0 || h == 0) throw UsageError("size must be positive, got '" + s + "'");
  return {w, h};
}

int run_bench(const BenchArgs& a) {
  const auto [w, h] = parse_dims(a.size);
  validating([&] { require_lambda(a.lambda); });
  if (a.reps < 5) throw UsageError("--reps must be at least 5");
  std::vector<ComputePath> paths;
  for (const auto& p : split(a.paths, ',')) paths.push_back(parse_path(p));
  if (paths.empty()) throw UsageError("no compute paths given");
  const bool has_exact = std::find(paths.begin(), paths.end(), ComputePath::kExact) != paths.end();
  if (has_exact && w * h > a.exact_budget && !a.force)
    throw UsageError("exact path refused for " + std::to_string(w * h) +
                     " pixels (budget " + std::to_string(a.exact_budget) +
                     "); pass --force to run it anyway");

  const LuminanceGrid mask = synthetic_mask(w, h, a.seed);
  json report = {{"size", {{"width", w}, {"height", h}}},
                 {"lambda", a.lambda},
                 {"seed", a.seed},
                 {"repetitions", a.reps}};
  std::vector<Heatmap> results;
  json timings = json::object();
  for (ComputePath p : paths) {
    std::vector<double> ms;
    std::optional<Heatmap> last;
    for (std::size_t r = 0; r < a.reps; ++r) {
      const auto start = std::chrono::steady_clock::now();
      last.emplace(compute_pgm(mask, a.lambda, p));
      ms.push_back(elapsed_ms(start));
    }
    std::sort(ms.begin(), ms.end());
    timings[std::string(to_string(p))] = {{"median_ms", ms[ms.size() / 2]},
                                          {"min_ms", ms.front()},
                                          {"max_ms", ms.back()}};
    results.push_back(std::move(*last));
  }
  report["paths"] = timings;

  // Deviation of every path from the reference (exact when run, else the
  // first path listed).
  std::size_t ref = 0;
  for (std::size_t i = 0; i < paths.size(); ++i)
    if (paths[i] == ComputePath::kExact) ref = i;
  json dev = json::object();
  double worst = 0.0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (i == ref) continue;
    const double e = max_relative_error(results[i], results[ref]);
    dev[std::string(to_string(paths[i]))] = e;
    worst = std::max(worst, e);
  }
  report["reference_path"] = std::string(to_string(paths[ref]));
  report["relative_deviation"] = dev;
  report["max_relative_deviation"] = worst;
  std::cout << report.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fan

struct FanArgs {
  std::string input;
  std::string gain_out;
  std::string out;
  FanConfig cfg;
};

int run_fan(const FanArgs& a) {
  validating([&] { a.cfg.validate(); });
  const RealGrid f = read_real_grid(a.input, format_for_path(a.input));
  const RealGrid gain = fan_gain(f, a.cfg);
  const RealGrid filtered = fan_apply(f, gain, a.cfg.alpha);
  write_grid(gain, a.gain_out, GridFormat::kPfmFloat);
  write_grid(filtered, a.out, GridFormat::kPfmFloat);
  return 0;
}

// ---------------------------------------------------------------------------
// loss

struct LossArgs {
  std::string gt_mask;
  std::string pred_mask;
  std::string pred_heatmaps;
  std::string target_heatmaps;
  std::string strides;
  std::string logits;
  std::optional<std::size_t> label;
  std::optional<double> objectness;
  std::optional<int> obj_label;
  std::string weights = "0.2,0.2,0.2,0.2,0.2";
  std::string out;
};

LossWeights parse_weights(const std::string& s) {
  const auto w = parse_double_list(s, "weight");
  if (w.size() != 5) throw UsageError("--weights needs five values: cls,obj,mask,dice,gh");
  LossWeights lw{w[0], w[1], w[2], w[3], w[4]};
  validating([&] { lw.validate(); });
  return lw;
}

double lambda_from_name(const fs::path& p) {
  static const std::regex re(R"(_lambda([0-9.eE+-]+)$)");
  std::smatch m;
  const std::string stem = p.stem().string();
  if (!std::regex_search(stem, m, re))
    throw UsageError("cannot read lambda from file name " + p.filename().string() +
                     " (expected *_lambda<value>.pfm)");
  return parse_double(m[1].str(), "lambda suffix");
}

int run_loss(const LossArgs& a) {
  const LossWeights weights = parse_weights(a.weights);

  // Parse and validate every input before computing.
  std::optional<BinaryMask> gt;
  if (!a.gt_mask.empty()) gt = read_mask(a.gt_mask);
  std::optional<RealGrid> pred;
  if (!a.pred_mask.empty()) {
    if (!gt) throw UsageError("--pred-mask needs --gt-mask");
    pred = read_real_grid(a.pred_mask, format_for_path(a.pred_mask));
    if (pred->width() != gt->width() || pred->height() != gt->height())
      throw UsageError("prediction mask shape " + std::to_string(pred->width()) + "x" +
                       std::to_string(pred->height()) + " differs from ground truth " +
                       std::to_string(gt->width()) + "x" + std::to_string(gt->height()));
  }

  const auto pred_files = split(a.pred_heatmaps, ',');
  const auto target_files = split(a.target_heatmaps, ',');
  if (pred_files.size() != target_files.size())
    throw UsageError("--pred-heatmaps and --target-heatmaps need equal counts");
  std::vector<std::size_t> strides;
  for (const auto& s : split(a.strides, ',')) strides.push_back(parse_size(s, "stride"));
  if (strides.empty()) strides.assign(target_files.size(), 1);
  if (strides.size() != target_files.size())
    throw UsageError("--strides needs one value per heatmap");
  std::vector<RealGrid> pred_maps;
  std::vector<Heatmap> targets;
  for (std::size_t i = 0; i < target_files.size(); ++i) {
    pred_maps.push_back(read_real_grid(pred_files[i], format_for_path(pred_files[i])));
    const double lambda = lambda_from_name(target_files[i]);
    RealGrid t = read_real_grid(target_files[i], format_for_path(target_files[i]));
    const double peak = t.empty() ? 0.0 : *std::max_element(t.values().begin(), t.values().end());
    if (peak != 0.0 && std::abs(peak - 1.0) > 1e-6)
      throw UsageError("target heatmap " + target_files[i] + " is not max-normalized");
    validating([&] { targets.emplace_back(std::move(t), lambda, Normalization::kMaxOne); });
  }
  std::optional<HeatmapStack> stack;
  if (!targets.empty()) validating([&] { stack.emplace(std::move(targets)); });

  std::vector<double> logits;
  if (!a.logits.empty()) {
    logits = parse_double_list(a.logits, "logit");
    if (!a.label) throw UsageError("--logits needs --label");
    if (*a.label >= logits.size()) throw UsageError("--label out of range");
  }
  if (a.objectness.has_value() != a.obj_label.has_value())
    throw UsageError("--objectness and --obj-label go together");
  if (a.obj_label && *a.obj_label != 0 && *a.obj_label != 1)
    throw UsageError("--obj-label must be 0 or 1");

  LossParts parts;
  json present = json::array();
  if (!logits.empty()) {
    parts.cls = cross_entropy(logits, *a.label);
    present.push_back("cls");
  }
  if (a.objectness) {
    parts.obj = bce_scalar(*a.objectness, *a.obj_label);
    present.push_back("obj");
  }
  if (pred) {
    parts.mask = bce_pixel(*pred, *gt);
    parts.dice = dice_loss(*pred, *gt);
    present.push_back("mask");
    present.push_back("dice");
  }
  if (stack) {
    parts.gh = gh_loss(pred_maps, *stack, strides);
    present.push_back("gh");
  }
  const LossBreakdown b = total_loss(parts, weights);
  const json out = {
      {"cls", b.cls},   {"obj", b.obj},     {"mask", b.mask},
      {"dice", b.dice}, {"gh", b.gh},       {"total", b.total},
      {"weights", {{"cls", weights.cls}, {"obj", weights.obj}, {"mask", weights.mask},
                   {"dice", weights.dice}, {"gh", weights.gh}}},
      {"terms_present", present},
  };
  const std::string text = out.dump(2) + "\n";
  if (!a.out.empty()) write_text(a.out, text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string gt;
  std::string pred;
  std::string pr_dir;
  double pr_iou = 0.5;
  std::size_t max_dets = 100;
  std::string out;
};

json summary_json(const ApSummary& s) {
  return {{"map", s.map},   {"ap50", s.ap50}, {"ap75", s.ap75},
          {"ap_s", s.ap_s}, {"ap_m", s.ap_m}, {"ap_l", s.ap_l}};
}

int run_eval(const EvalArgs& a) {
  if (!(a.pr_iou > 0.0 && a.pr_iou <= 1.0)) throw UsageError("--pr-iou must lie in (0, 1]");
  const auto gt = load_annotations(a.gt, RecordKind::kGroundTruth);
  const auto pred = load_annotations(a.pred, RecordKind::kPrediction);
  EvalOptions opts;
  opts.max_detections = a.max_dets;
  const MaskEvaluator evaluator(gt, pred, opts);
  const EvalResult r = evaluator.evaluate();

  json out = summary_json(r);
  json per = json::object();
  for (const auto& [cat, s] : r.per_category) per[std::to_string(cat)] = summary_json(s);
  out["per_category"] = per;

  std::vector<std::pair<fs::path, std::string>> csvs;
  if (!a.pr_dir.empty()) {
    for (std::int64_t cat : evaluator.categories()) {
      const PrCurve c = evaluator.curve(cat, a.pr_iou);
      if (c.points.empty()) continue;
      std::string text = "recall,precision\n";
      for (const auto& [rec, prec] : c.points)
        text += format_number(rec) + "," + format_number(prec) + "\n";
      csvs.emplace_back(fs::path(a.pr_dir) / ("pr_category" + std::to_string(cat) + "_iou" +
                                              format_number(a.pr_iou) + ".csv"),
                        std::move(text));
    }
  }
  const std::string text = out.dump(2) + "\n";
  if (!csvs.empty()) ensure_dir(a.pr_dir);
  for (const auto& [p, t] : csvs) write_text(p, t);
  if (!a.out.empty()) write_text(a.out, text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------------------
// viz

struct VizArgs {
  std::string mask;
  std::string lambdas = "1,5,10,20";
  std::string path = "separable";
  std::string out;
};

constexpr std::size_t kSeparator = 2;

int run_viz(const VizArgs& a, std::size_t threads) {
  const auto lambdas = parse_double_list(a.lambdas, "lambda");
  const ComputePath path = parse_path(a.path);
  validating([&] { validate_lambdas(lambdas); });
  const LuminanceGrid image = read_grid(a.mask, format_for_path(a.mask));
  const HeatmapStack stack =
      multiscale_stack(image, lambdas, path, Normalization::kMaxOne, threads);
  const std::size_t w = image.width(), h = image.height(), n = stack.size();
  RealGrid panel(n * w + (n - 1) * kSeparator, h, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x0 = i * (w + kSeparator);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) panel(x0 + x, y) = stack[i](x, y);
  }
  write_grid(panel, a.out, GridFormat::kNetpbmGray16);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pgmkit: Gaussian-mixture heatmaps, frequency gain, losses and mask metrics"};
  app.require_subcommand(1);
  std::size_t threads = default_thread_count();
  app.add_option("--threads", threads, "Worker threads (default: $PGMKIT_THREADS or cores)")
      ->check(CLI::PositiveNumber);

  HeatmapArgs hm;
  auto* heatmap = app.add_subcommand("heatmap", "Multi-scale heatmaps from a mask");
  heatmap->add_option("--mask", hm.mask, "Mask or luminance image (P5 or PFM)")->required();
  heatmap->add_option("--lambdas", hm.lambdas, "Comma-separated, strictly increasing")
      ->capture_default_str();
  heatmap->add_option("--path", hm.path, "exact | separable | fft")->capture_default_str();
  heatmap->add_option("--normalize", hm.normalize, "raw | max")->capture_default_str();
  heatmap->add_option("--out-dir", hm.out_dir, "Output directory")->required();
  heatmap->add_option("--prefix", hm.prefix, "File prefix (default: mask file stem)");
  heatmap->add_option("--format", hm.format, "pfm | gray16")->capture_default_str();

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Time the compute paths on a synthetic mask");
  bench->add_option("--size", bn.size, "WxH")->capture_default_str();
  bench->add_option("--lambda", bn.lambda)->capture_default_str();
  bench->add_option("--paths", bn.paths, "Comma-separated compute paths")->capture_default_str();
  bench->add_option("--reps", bn.reps, "Repetitions per path (>= 5)")->capture_default_str();
  bench->add_option("--seed", bn.seed, "Synthetic mask seed")->capture_default_str();
  bench->add_option("--exact-budget", bn.exact_budget, "Max pixels for the exact path")
      ->capture_default_str();
  bench->add_flag("--force", bn.force, "Run the exact path beyond its budget");

  FanArgs fa;
  auto* fan = app.add_subcommand("fan", "High-frequency gain map and residual filtering");
  fan->add_option("--input", fa.input, "Feature grid (PFM or P5)")->required();
  fan->add_option("--gain-out", fa.gain_out, "Gain map output (PFM)")->required();
  fan->add_option("--out", fa.out, "Filtered grid output (PFM)")->required();
  fan->add_option("--rho0", fa.cfg.rho0, "Cutoff radial frequency (0, 0.5]")->capture_default_str();
  fan->add_option("--sharpness", fa.cfg.sharpness, "Butterworth order")->capture_default_str();
  fan->add_option("--alpha", fa.cfg.alpha, "Residual strength")->capture_default_str();

  LossArgs ls;
  auto* loss = app.add_subcommand("loss", "Weighted training-objective breakdown as JSON");
  loss->add_option("--gt-mask", ls.gt_mask, "Ground-truth mask (P5)");
  loss->add_option("--pred-mask", ls.pred_mask, "Predicted probabilities (PFM)");
  loss->add_option("--pred-heatmaps", ls.pred_heatmaps, "Predicted maps, comma-separated PFM");
  loss->add_option("--target-heatmaps", ls.target_heatmaps,
                   "Target maps (*_lambda<v>.pfm, max-normalized), comma-separated");
  loss->add_option("--strides", ls.strides, "Pooling stride per target map (default 1)");
  loss->add_option("--logits", ls.logits, "Category logits, comma-separated");
  loss->add_option("--label", ls.label, "Category label index");
  loss->add_option("--objectness", ls.objectness, "Objectness probability");
  loss->add_option("--obj-label", ls.obj_label, "Objectness label (0 or 1)");
  loss->add_option("--weights", ls.weights, "cls,obj,mask,dice,gh")->capture_default_str();
  loss->add_option("--out", ls.out, "Also write the JSON here");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "COCO-style mask AP from annotation JSON");
  eval->add_option("--gt", ev.gt, "Ground-truth annotation JSON")->required();
  eval->add_option("--pred", ev.pred, "Prediction annotation JSON")->required();
  eval->add_option("--pr-dir", ev.pr_dir, "Write per-category PR-curve CSVs here");
  eval->add_option("--pr-iou", ev.pr_iou, "IoU threshold of the PR curves")->capture_default_str();
  eval->add_option("--max-dets", ev.max_dets, "Detections kept per image and category")
      ->capture_default_str();
  eval->add_option("--out", ev.out, "Also write the JSON here");

  VizArgs vz;
  auto* viz = app.add_subcommand("viz", "Side-by-side gray16 panel of the heatmap stack");
  viz->add_option("--mask", vz.mask, "Mask or luminance image (P5 or PFM)")->required();
  viz->add_option("--lambdas", vz.lambdas)->capture_default_str();
  viz->add_option("--path", vz.path, "exact | separable | fft")->capture_default_str();
  viz->add_option("--out", vz.out, "Panel output (P5, 16-bit)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (heatmap->parsed()) return run_heatmap(hm, threads);
    if (bench->parsed()) return run_bench(bn);
    if (fan->parsed()) return run_fan(fa);
    if (loss->parsed()) return run_loss(ls);
    if (eval->parsed()) return run_eval(ev);
    if (viz->parsed()) return run_viz(vz, threads);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RangeError& e) {
    std::cerr << "range error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitUsage;
}

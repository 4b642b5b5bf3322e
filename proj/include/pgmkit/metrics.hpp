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

// COCO-style mask evaluation.
//
// Per image and category, detections are visited by descending score (ties:
// ascending input index) and capped at max_detections. Each takes the
// unmatched ground truth with the highest IoU >= threshold (ties: lowest
// index), preferring ground truth inside the active area band. Detections
// matched to out-of-band ground truth, or unmatched and themselves out of
// band, are ignored.
//
// For every (category, area band, IoU threshold) slice the detections of all
// images are ranked together, precision is made non-increasing from the
// right, and sampled at the 101 recall points 0, 0.01, ..., 1. AP is the
// mean of those samples; a slice without ground truth has AP -1.
//
// mAP and AP_S/M/L average over thresholds 0.50:0.05:0.95. Area bands:
// small < 32^2, medium [32^2, 96^2), large >= 96^2 pixels.

#ifndef PGMKIT_METRICS_HPP_
#define PGMKIT_METRICS_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgmkit/errors.hpp"
#include "pgmkit/grid.hpp"
#include "pgmkit/mask_io.hpp"

namespace pgmkit {

struct IouResult {
  double iou = 0.0;
  bool empty_pair = false;  // both masks empty; iou reported as 0
};

inline IouResult mask_iou_detailed(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw DomainError("mask_iou: mask dimensions differ");
  std::size_t inter = 0, uni = 0;
  const auto pa = a.bits(), pb = b.bits();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    inter += pa[i] & pb[i];
    uni += pa[i] | pb[i];
  }
  if (uni == 0) return {0.0, true};
  return {double(inter) / double(uni), false};
}

inline double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  return mask_iou_detailed(a, b).iou;
}

/// Half-open pixel-area interval [lo, hi).
struct AreaRange {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool contains(std::size_t area) const { return double(area) >= lo && double(area) < hi; }
};

inline constexpr AreaRange kAreaAll{};
inline constexpr AreaRange kAreaSmall{0.0, 32.0 * 32.0};
inline constexpr AreaRange kAreaMedium{32.0 * 32.0, 96.0 * 96.0};
inline constexpr AreaRange kAreaLarge{96.0 * 96.0, std::numeric_limits<double>::infinity()};

inline constexpr std::size_t kRecallPoints = 101;

/// 0.50, 0.55, ..., 0.95.
inline std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 95; k += 5) t.push_back(k / 100.0);
  return t;
}

struct Match {
  std::size_t det_index;
  std::optional<std::size_t> gt_index;  // nullopt: false positive
};

namespace metrics_detail {

// Detection indices by descending score, ties by ascending index.
template <typename ScoreFn>
std::vector<std::size_t> score_order(std::size_t n, ScoreFn score) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return score(a) > score(b);
  });
  return order;
}

// Greedy matching for one image. `iou(d, g)` looks up the IoU of detection d
// and ground truth g; `gt_ignored[g]` marks ground truth outside the band.
// Returns, per entry of det_order, the matched ground-truth index.
template <typename IouFn>
std::vector<std::optional<std::size_t>> greedy_match(std::span<const std::size_t> det_order,
                                                     std::size_t num_gt, IouFn iou,
                                                     const std::vector<bool>& gt_ignored,
                                                     double threshold) {
  std::vector<bool> taken(num_gt, false);
  std::vector<std::optional<std::size_t>> out;
  out.reserve(det_order.size());
  for (std::size_t d : det_order) {
    std::optional<std::size_t> best;
    // In-band ground truth first; out-of-band only if nothing in band fits.
    for (bool want_ignored : {false, true}) {
      double best_iou = threshold;
      for (std::size_t g = 0; g < num_gt; ++g) {
        if (taken[g] || gt_ignored[g] != want_ignored) continue;
        const double v = iou(d, g);
        if (v < best_iou || (best && v == best_iou)) continue;
        best_iou = v;
        best = g;
      }
      if (best) break;
    }
    if (best) taken[*best] = true;
    out.push_back(best);
  }
  return out;
}

}  // namespace metrics_detail

/// Greedy matching of one image's detections against its ground truth, all
/// of one category. Entries follow processing order (descending score).
inline std::vector<Match> match_instances(std::span<const Detection> dets,
                                          std::span<const InstanceAnnotation> gts,
                                          double iou_threshold) {
  const auto order =
      metrics_detail::score_order(dets.size(), [&](std::size_t i) { return dets[i].score(); });
  const std::vector<bool> ignored(gts.size(), false);
  const auto matched = metrics_detail::greedy_match(
      order, gts.size(),
      [&](std::size_t d, std::size_t g) { return mask_iou(dets[d].mask(), gts[g].mask()); },
      ignored, iou_threshold);
  std::vector<Match> out;
  out.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) out.push_back({order[i], matched[i]});
  return out;
}

/// Interpolated precision at recall 0, 0.01, ..., 1.
struct PrCurve {
  double threshold = 0.5;
  std::vector<std::pair<double, double>> points;  // (recall, precision); empty without GT
};

/// Ranked detections of one slice, reduced to what AP needs.
struct RankedDetection {
  double score;
  std::size_t order;  // global input index, for tie-breaking
  bool true_positive;
};

/// Builds the interpolated curve from ranked detections and the number of
/// in-band ground truth instances.
inline PrCurve interpolated_pr(std::vector<RankedDetection> dets, std::size_t num_gt,
                               double threshold) {
  PrCurve curve;
  curve.threshold = threshold;
  if (num_gt == 0) return curve;
  std::sort(dets.begin(), dets.end(), [](const RankedDetection& a, const RankedDetection& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.order < b.order;
  });
  std::vector<double> recall(dets.size()), precision(dets.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    tp += dets[i].true_positive;
    recall[i] = double(tp) / double(num_gt);
    precision[i] = double(tp) / double(i + 1);
  }
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  curve.points.reserve(kRecallPoints);
  for (std::size_t k = 0; k < kRecallPoints; ++k) {
    const double r = double(k) / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    const double p = it == recall.end() ? 0.0 : precision[std::size_t(it - recall.begin())];
    curve.points.emplace_back(r, p);
  }
  return curve;
}

/// Mean of the curve's precision samples; -1 for a curve without GT.
inline double curve_ap(const PrCurve& curve) {
  if (curve.points.empty()) return -1.0;
  double sum = 0.0;
  for (const auto& [r, p] : curve.points) sum += p;
  return sum / double(curve.points.size());
}

struct EvalOptions {
  std::size_t max_detections = 100;  // per image and category
  std::vector<double> iou_thresholds = coco_iou_thresholds();
};

/// AP fields; -1 marks a slice without ground truth.
struct ApSummary {
  double map = -1.0;
  double ap50 = -1.0;
  double ap75 = -1.0;
  double ap_s = -1.0;
  double ap_m = -1.0;
  double ap_l = -1.0;
};

struct EvalResult : ApSummary {
  std::map<std::int64_t, ApSummary> per_category;
};

/// Dataset-level evaluator over ground-truth and prediction image lists
/// keyed by image_id. IoUs are computed once and shared by all slices.
/// Holds pointers into both inputs, which must outlive the evaluator.
class MaskEvaluator {
 public:
  MaskEvaluator(const std::vector<AnnotatedImage>& ground_truth,
                const std::vector<AnnotatedImage>& predictions, EvalOptions opts = {})
      : opts_(std::move(opts)) {
    std::map<std::int64_t, std::size_t> image_index;
    for (const auto& img : ground_truth) {
      image_index.emplace(img.image_id, images_.size());
      images_.push_back(&img);
    }
    for (const auto& img : ground_truth)
      for (const auto& gt : img.instances) categories_.insert(gt.category_id());

    std::size_t global = 0;
    for (const auto& img : predictions) {
      auto it = image_index.find(img.image_id);
      if (it == image_index.end() && !img.detections.empty())
        throw SchemaError("predictions refer to image " + std::to_string(img.image_id) +
                          " absent from ground truth");
      for (std::size_t d = 0; d < img.detections.size(); ++d, ++global) {
        const Detection& det = img.detections[d];
        categories_.insert(det.category_id());
        cells_[{it->second, det.category_id()}].dets.push_back({&det, global});
      }
    }
    for (std::size_t i = 0; i < images_.size(); ++i)
      for (const auto& gt : images_[i]->instances)
        cells_[{i, gt.category_id()}].gts.push_back(&gt);

    for (auto& [key, cell] : cells_) prepare(cell);
  }

  const std::set<std::int64_t>& categories() const noexcept { return categories_; }

  /// Curve for one category, area band and IoU threshold.
  PrCurve curve(std::int64_t category, double threshold, AreaRange band = kAreaAll) const {
    std::vector<RankedDetection> ranked;
    std::size_t num_gt = 0;
    for (const auto& [key, cell] : cells_) {
      if (key.second != category) continue;
      std::vector<bool> ignored(cell.gts.size());
      for (std::size_t g = 0; g < cell.gts.size(); ++g) {
        ignored[g] = !band.contains(cell.gts[g]->area());
        num_gt += !ignored[g];
      }
      std::vector<std::size_t> order(cell.dets.size());
      std::iota(order.begin(), order.end(), 0);
      const auto matched = metrics_detail::greedy_match(
          order, cell.gts.size(),
          [&](std::size_t d, std::size_t g) { return cell.iou[d * cell.gts.size() + g]; },
          ignored, threshold);
      for (std::size_t d = 0; d < cell.dets.size(); ++d) {
        const auto& det = cell.dets[d];
        if (matched[d] ? ignored[*matched[d]] : !band.contains(det.det->area())) continue;
        ranked.push_back({det.det->score(), det.order, matched[d].has_value()});
      }
    }
    return interpolated_pr(std::move(ranked), num_gt, threshold);
  }

  double average_precision(std::int64_t category, double threshold,
                           AreaRange band = kAreaAll) const {
    return curve_ap(this->curve(category, threshold, band));
  }

  EvalResult evaluate() const {
    EvalResult result;
    const auto& ts = opts_.iou_thresholds;
    auto index_of = [&](double t) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i] == t) return i;
      return std::nullopt;
    };
    const auto i50 = index_of(0.5), i75 = index_of(0.75);

    for (std::int64_t cat : categories_) {
      ApSummary s;
      auto band_mean = [&](AreaRange band, std::vector<double>* per_t) {
        double sum = 0.0;
        for (double t : ts) {
          const double ap = average_precision(cat, t, band);
          if (ap < 0.0) return -1.0;  // no in-band GT: same for every threshold
          if (per_t) per_t->push_back(ap);
          sum += ap;
        }
        return ts.empty() ? -1.0 : sum / double(ts.size());
      };
      std::vector<double> all_t;
      s.map = band_mean(kAreaAll, &all_t);
      if (s.map >= 0.0) {
        if (i50) s.ap50 = all_t[*i50];
        if (i75) s.ap75 = all_t[*i75];
      }
      s.ap_s = band_mean(kAreaSmall, nullptr);
      s.ap_m = band_mean(kAreaMedium, nullptr);
      s.ap_l = band_mean(kAreaLarge, nullptr);
      result.per_category.emplace(cat, s);
    }

    auto mean_defined = [&](double ApSummary::*field) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& [cat, s] : result.per_category) {
        if (s.*field < 0.0) continue;
        sum += s.*field;
        ++n;
      }
      return n ? sum / double(n) : -1.0;
    };
    result.map = mean_defined(&ApSummary::map);
    result.ap50 = mean_defined(&ApSummary::ap50);
    result.ap75 = mean_defined(&ApSummary::ap75);
    result.ap_s = mean_defined(&ApSummary::ap_s);
    result.ap_m = mean_defined(&ApSummary::ap_m);
    result.ap_l = mean_defined(&ApSummary::ap_l);
    return result;
  }

 private:
  struct DetRef {
    const Detection* det;
    std::size_t order;
  };
  struct Cell {
    std::vector<DetRef> dets;  // score order, capped
    std::vector<const InstanceAnnotation*> gts;
    std::vector<double> iou;   // dets.size() x gts.size()
  };

  void prepare(Cell& cell) const {
    std::stable_sort(cell.dets.begin(), cell.dets.end(), [](const DetRef& a, const DetRef& b) {
      if (a.det->score() != b.det->score()) return a.det->score() > b.det->score();
      return a.order < b.order;
    });
    if (cell.dets.size() > opts_.max_detections) cell.dets.resize(opts_.max_detections);
    cell.iou.resize(cell.dets.size() * cell.gts.size());
    for (std::size_t d = 0; d < cell.dets.size(); ++d)
      for (std::size_t g = 0; g < cell.gts.size(); ++g)
        cell.iou[d * cell.gts.size() + g] = mask_iou(cell.dets[d].det->mask(), cell.gts[g]->mask());
  }

  EvalOptions opts_;
  std::vector<const AnnotatedImage*> images_;
  std::set<std::int64_t> categories_;
  std::map<std::pair<std::size_t, std::int64_t>, Cell> cells_;
};

inline EvalResult coco_map(const std::vector<AnnotatedImage>& ground_truth,
                           const std::vector<AnnotatedImage>& predictions,
                           const EvalOptions& opts = {}) {
  return MaskEvaluator(ground_truth, predictions, opts).evaluate();
}

namespace metrics_detail {

inline std::pair<std::vector<AnnotatedImage>, std::vector<AnnotatedImage>> single_image(
    std::span<const Detection> dets, std::span<const InstanceAnnotation> gts) {
  AnnotatedImage gt_img, det_img;
  gt_img.instances.assign(gts.begin(), gts.end());
  det_img.detections.assign(dets.begin(), dets.end());
  std::vector<AnnotatedImage> g, p;
  g.push_back(std::move(gt_img));
  p.push_back(std::move(det_img));
  return {std::move(g), std::move(p)};
}

}  // namespace metrics_detail

/// AP of one category whose detections and ground truth share one image.
/// The category is taken from the records; all must agree.
inline double average_precision(std::span<const Detection> dets,
                                std::span<const InstanceAnnotation> gts, double iou_threshold) {
  auto [g, p] = metrics_detail::single_image(dets, gts);
  EvalOptions opts;
  opts.max_detections = std::numeric_limits<std::size_t>::max();
  MaskEvaluator ev(g, p, opts);
  if (ev.categories().size() > 1) throw DomainError("average_precision: mixed categories");
  if (ev.categories().empty()) return -1.0;
  return ev.average_precision(*ev.categories().begin(), iou_threshold);
}

inline PrCurve pr_curve(std::span<const Detection> dets, std::span<const InstanceAnnotation> gts,
                        double iou_threshold) {
  auto [g, p] = metrics_detail::single_image(dets, gts);
  EvalOptions opts;
  opts.max_detections = std::numeric_limits<std::size_t>::max();
  MaskEvaluator ev(g, p, opts);
  if (ev.categories().size() > 1) throw DomainError("pr_curve: mixed categories");
  if (ev.categories().empty()) return PrCurve{iou_threshold, {}};
  return ev.curve(*ev.categories().begin(), iou_threshold);
}

}  // namespace pgmkit

#endif  // PGMKIT_METRICS_HPP_

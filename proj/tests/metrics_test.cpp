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

#include "pgmkit/metrics.hpp"

#include <gtest/gtest.h>

#include "oracles/oracles.hpp"

namespace pgmkit {
namespace {

BinaryMask box(std::size_t w, std::size_t h, std::size_t x0, std::size_t y0, std::size_t bw,
               std::size_t bh) {
  BinaryMask m(w, h);
  for (std::size_t y = y0; y < y0 + bh; ++y)
    for (std::size_t x = x0; x < x0 + bw; ++x) m.set(x, y, true);
  return m;
}

void expect_summary_near(const ApSummary& got, const oracle::ReferenceSummary& ref, double tol) {
  EXPECT_NEAR(got.map, ref.map, tol);
  EXPECT_NEAR(got.ap50, ref.ap50, tol);
  EXPECT_NEAR(got.ap75, ref.ap75, tol);
  EXPECT_NEAR(got.ap_s, ref.ap_s, tol);
  EXPECT_NEAR(got.ap_m, ref.ap_m, tol);
  EXPECT_NEAR(got.ap_l, ref.ap_l, tol);
}

// Copy of a scene with every score mapped through `f`.
template <typename F>
std::vector<AnnotatedImage> rescored(const std::vector<AnnotatedImage>& pred, F f) {
  auto out = pred;
  for (auto& img : out)
    for (auto& d : img.detections) d = Detection(d.category_id(), f(d.score()), d.mask());
  return out;
}

TEST(MaskIouTest, Examples) {
  const auto a = box(4, 4, 0, 0, 2, 2);
  EXPECT_EQ(mask_iou(a, a), 1.0);
  EXPECT_EQ(mask_iou(a, box(4, 4, 2, 2, 2, 2)), 0.0);
  const BinaryMask p(2, 2, {1, 1, 0, 0}), q(2, 2, {1, 0, 1, 0});
  EXPECT_DOUBLE_EQ(mask_iou(p, q), 1.0 / 3.0);
  EXPECT_THROW(mask_iou(p, BinaryMask(3, 2)), DomainError);
}

TEST(MaskIouTest, EmptyPairIsZeroWithFlag) {
  const auto r = mask_iou_detailed(BinaryMask(3, 3), BinaryMask(3, 3));
  EXPECT_EQ(r.iou, 0.0);
  EXPECT_TRUE(r.empty_pair);
  EXPECT_FALSE(mask_iou_detailed(box(3, 3, 0, 0, 1, 1), BinaryMask(3, 3)).empty_pair);
}

TEST(MatchTest, Examples) {
  const auto gt_mask = box(10, 10, 0, 0, 10, 10);
  const std::vector<InstanceAnnotation> gts{{0, gt_mask}};
  // 90 of 100 pixels overlap.
  const std::vector<Detection> good{{0, 0.7, box(10, 10, 0, 0, 10, 9)}};
  auto m = match_instances(good, gts, 0.5);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].gt_index, std::optional<std::size_t>(0));

  const std::vector<Detection> poor{{0, 0.7, box(10, 10, 0, 0, 10, 3)}};
  EXPECT_FALSE(match_instances(poor, gts, 0.5)[0].gt_index);

  const std::vector<Detection> two{{0, 0.8, box(10, 10, 0, 0, 10, 9)},
                                   {0, 0.9, box(10, 10, 0, 1, 10, 9)}};
  m = match_instances(two, gts, 0.5);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].det_index, 1u);
  EXPECT_EQ(m[0].gt_index, std::optional<std::size_t>(0));
  EXPECT_EQ(m[1].det_index, 0u);
  EXPECT_FALSE(m[1].gt_index);
}

TEST(MatchTest, ScoreTiesFollowInputOrderAndIouTiesLowestGt) {
  const std::vector<InstanceAnnotation> gts{{0, box(8, 4, 0, 0, 4, 4)},
                                            {0, box(8, 4, 4, 0, 4, 4)}};
  // Covers both GT halves equally: IoU 0.5 with each.
  const std::vector<Detection> dets{{0, 0.5, box(8, 4, 0, 0, 8, 4)},
                                    {0, 0.5, box(8, 4, 0, 0, 8, 4)}};
  const auto m = match_instances(dets, gts, 0.5);
  EXPECT_EQ(m[0].det_index, 0u);
  EXPECT_EQ(m[0].gt_index, std::optional<std::size_t>(0));
  EXPECT_EQ(m[1].gt_index, std::optional<std::size_t>(1));
}

TEST(AveragePrecisionTest, Examples) {
  const auto gt_mask = box(8, 8, 2, 2, 4, 4);
  const std::vector<InstanceAnnotation> gts{{1, gt_mask}};
  const std::vector<Detection> perfect{{1, 0.9, gt_mask}};
  EXPECT_EQ(average_precision(perfect, gts, 0.5), 1.0);

  // FP ranked first, TP second: precision 1/2 at every recall level.
  const std::vector<Detection> fp_tp{{1, 0.9, box(8, 8, 0, 0, 1, 1)}, {1, 0.8, gt_mask}};
  EXPECT_DOUBLE_EQ(average_precision(fp_tp, gts, 0.5), 0.5);
  {
    oracle::FlatGt g{0, 1, gt_mask};
    std::vector<oracle::FlatDet> d{{0, 1, 0.9, box(8, 8, 0, 0, 1, 1)}, {0, 1, 0.8, gt_mask}};
    EXPECT_DOUBLE_EQ(oracle::reference_ap({g}, d, 1, 50, {0, 0}), 0.5);
  }

  EXPECT_EQ(average_precision({}, gts, 0.5), 0.0);
  EXPECT_EQ(average_precision(perfect, {}, 0.5), -1.0);
  const std::vector<Detection> mixed{{1, 0.9, gt_mask}, {2, 0.9, gt_mask}};
  EXPECT_THROW(average_precision(mixed, gts, 0.5), DomainError);
}

TEST(PrCurveTest, Examples) {
  const auto gt_mask = box(8, 8, 2, 2, 4, 4);
  const std::vector<InstanceAnnotation> gts{{1, gt_mask}};
  const std::vector<Detection> perfect{{1, 0.9, gt_mask}};
  const auto c = pr_curve(perfect, gts, 0.5);
  ASSERT_EQ(c.points.size(), kRecallPoints);
  for (std::size_t k = 0; k < kRecallPoints; ++k) {
    EXPECT_EQ(c.points[k].first, double(k) / 100.0);
    EXPECT_EQ(c.points[k].second, 1.0);
  }
  for (const auto& [r, p] : pr_curve({}, gts, 0.5).points) EXPECT_EQ(p, 0.0);

  const std::vector<Detection> fp_tp{{1, 0.9, box(8, 8, 0, 0, 1, 1)}, {1, 0.8, gt_mask}};
  EXPECT_EQ(curve_ap(pr_curve(fp_tp, gts, 0.5)), average_precision(fp_tp, gts, 0.5));
}

TEST(CocoMapTest, PerfectPredictions) {
  auto gt = oracle::random_scene(77, 48).gt;
  for (auto& img : gt)
    std::erase_if(img.instances, [](const InstanceAnnotation& g) { return g.area() == 0; });
  auto pred = gt;
  for (auto& img : pred) {
    for (const auto& g : img.instances) img.detections.emplace_back(g.category_id(), 1.0, g.mask());
    img.instances.clear();
  }
  const auto r = coco_map(gt, pred);
  EXPECT_EQ(r.map, 1.0);
  for (double v : {r.map, r.ap50, r.ap75, r.ap_s, r.ap_m, r.ap_l})
    if (v >= 0.0) {
      EXPECT_EQ(v, 1.0);
    }
}

TEST(CocoMapTest, IdenticalBoxesScoreOne) {
  AnnotatedImage gt{1, 120, 120, {}, {}}, pred{1, 120, 120, {}, {}};
  for (auto [cat, side] : {std::pair<std::int64_t, std::size_t>{0, 10}, {0, 50}, {1, 110}}) {
    const auto m = box(120, 120, 0, 0, side, side);
    gt.instances.emplace_back(cat, m);
    pred.detections.emplace_back(cat, 0.5, m);
  }
  const auto r = coco_map({gt}, {pred});
  EXPECT_EQ(r.map, 1.0);
  EXPECT_EQ(r.ap_s, 1.0);
  EXPECT_EQ(r.ap_m, 1.0);
  EXPECT_EQ(r.ap_l, 1.0);
  EXPECT_EQ(r.per_category.at(1).ap_s, -1.0);
}

TEST(CocoMapTest, EmptyPredictionsScoreZero) {
  const auto scene = oracle::random_scene(5);
  std::vector<AnnotatedImage> none = scene.gt;
  for (auto& img : none) img.instances.clear();
  const auto r = coco_map(scene.gt, none);
  for (double v : {r.map, r.ap50, r.ap75, r.ap_s, r.ap_m, r.ap_l}) EXPECT_TRUE(v == 0.0 || v == -1.0);
  EXPECT_EQ(r.map, 0.0);
}

TEST(CocoMapTest, AreaBandsAreHalfOpen) {
  EXPECT_TRUE(kAreaSmall.contains(1023));
  EXPECT_FALSE(kAreaSmall.contains(1024));
  EXPECT_TRUE(kAreaMedium.contains(1024));
  EXPECT_FALSE(kAreaMedium.contains(9216));
  EXPECT_TRUE(kAreaLarge.contains(9216));
}

TEST(CocoMapTest, UnknownPredictionImageIsSchemaError) {
  const auto scene = oracle::random_scene(9);
  auto pred = scene.pred;
  pred.push_back({999, 16, 16, {}, {Detection(0, 0.5, BinaryMask(16, 16))}});
  EXPECT_THROW(coco_map(scene.gt, pred), SchemaError);
}

TEST(CocoMapTest, MaxDetectionsCapsPerImageAndCategory) {
  const auto gt_mask = box(8, 8, 0, 0, 4, 4);
  AnnotatedImage gt{1, 8, 8, {{0, gt_mask}}, {}}, pred{1, 8, 8, {}, {}};
  pred.detections.emplace_back(0, 0.9, box(8, 8, 6, 6, 1, 1));
  pred.detections.emplace_back(0, 0.8, gt_mask);
  EvalOptions opts;
  opts.max_detections = 1;
  EXPECT_EQ(coco_map({gt}, {pred}, opts).ap50, 0.0);
  EXPECT_DOUBLE_EQ(coco_map({gt}, {pred}).ap50, 0.5);
}

// Oracle equivalence and ranking properties on randomized small scenes.
TEST(CocoOracleTest, MatchesBruteForceReference) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto scene = oracle::random_scene(seed);
    const auto got = coco_map(scene.gt, scene.pred);
    const auto ref = oracle::reference_coco(scene.flat_gt, scene.flat_det);
    SCOPED_TRACE("seed " + std::to_string(seed));
    expect_summary_near(got, ref, 1e-9);
  }
}

TEST(CocoOracleTest, MatchesReferenceOnMediumScenes) {
  for (std::uint64_t seed = 1000; seed < 1030; ++seed) {
    const auto scene = oracle::random_scene(seed, 48);
    SCOPED_TRACE("seed " + std::to_string(seed));
    expect_summary_near(coco_map(scene.gt, scene.pred),
                        oracle::reference_coco(scene.flat_gt, scene.flat_det), 1e-9);
  }
}

TEST(CocoOracleTest, PerCategoryMatchesReference) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto scene = oracle::random_scene(seed);
    MaskEvaluator ev(scene.gt, scene.pred);
    for (auto cat : ev.categories())
      for (int pct = 50; pct <= 95; pct += 5) {
        const double got = ev.average_precision(cat, pct / 100.0);
        const double ref = oracle::reference_ap(scene.flat_gt, scene.flat_det, cat, pct, {0, 0});
        ASSERT_NEAR(got, ref, 1e-9) << "seed " << seed << " cat " << cat << " pct " << pct;
      }
  }
}

TEST(CocoPropertyTest, ScoreScalingInvariance) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto scene = oracle::random_scene(seed);
    const auto base = coco_map(scene.gt, scene.pred);
    const auto squared = coco_map(scene.gt, rescored(scene.pred, [](double s) { return s * s; }));
    const auto affine =
        coco_map(scene.gt, rescored(scene.pred, [](double s) { return 0.1 + 0.5 * s; }));
    SCOPED_TRACE("seed " + std::to_string(seed));
    for (const auto* r : {&squared, &affine}) {
      EXPECT_EQ(r->map, base.map);
      EXPECT_EQ(r->ap50, base.ap50);
      EXPECT_EQ(r->ap75, base.ap75);
      EXPECT_EQ(r->ap_s, base.ap_s);
    }
  }
}

TEST(CocoPropertyTest, ApNonIncreasingInThreshold) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto scene = oracle::random_scene(seed);
    MaskEvaluator ev(scene.gt, scene.pred);
    for (auto cat : ev.categories()) {
      double prev = 2.0;
      for (double t : coco_iou_thresholds()) {
        const double ap = ev.average_precision(cat, t);
        EXPECT_LE(ap, prev) << "seed " << seed << " cat " << cat << " t " << t;
        prev = ap;
      }
    }
  }
}

TEST(CocoPropertyTest, CurveMeanEqualsAp) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto scene = oracle::random_scene(seed);
    MaskEvaluator ev(scene.gt, scene.pred);
    for (auto cat : ev.categories())
      for (double t : {0.5, 0.75}) {
        const auto c = ev.curve(cat, t);
        const double ap = ev.average_precision(cat, t);
        if (c.points.empty()) {
          EXPECT_EQ(ap, -1.0);
          continue;
        }
        double mean = 0.0;
        for (const auto& [r, p] : c.points) mean += p;
        mean /= double(c.points.size());
        EXPECT_NEAR(mean, ap, 1e-12);
        for (std::size_t k = 1; k < c.points.size(); ++k)
          EXPECT_LE(c.points[k].second, c.points[k - 1].second);
      }
  }
}

TEST(CocoPropertyTest, LowestScoreMissNeverHelps) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto scene = oracle::random_scene(seed);
    auto extended = scene.pred;
    // Empty mask: zero IoU with everything, score below all others.
    extended[0].detections.emplace_back(0, 0.0, BinaryMask(16, 16));
    const MaskEvaluator before(scene.gt, scene.pred), after(scene.gt, extended);
    for (double t : coco_iou_thresholds())
      EXPECT_LE(after.average_precision(0, t), before.average_precision(0, t) + 1e-15);
  }
}

}  // namespace
}  // namespace pgmkit

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

// Training-objective terms for salient instance segmentation:
//
//   cls   softmax cross-entropy over category logits
//   obj   binary cross-entropy on the objectness score
//   mask  per-pixel binary cross-entropy, averaged over pixels
//   dice  soft Dice loss, eps = 1e-6
//   gh    mean over scales of the MSE between a predicted map and the
//         block-averaged Gaussian heatmap target for that scale
//
// combined as total = w_cls cls + w_obj obj + w_mask mask + w_dice dice + w_gh gh
// with every weight 0.2 by default.

#ifndef PGMKIT_LOSSES_HPP_
#define PGMKIT_LOSSES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "pgmkit/errors.hpp"
#include "pgmkit/grid.hpp"
#include "pgmkit/pgm.hpp"

namespace pgmkit {

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;
inline constexpr double kDiceEpsilon = 1e-6;

namespace loss_detail {

inline double clamp_prob(double p) {
  if (!std::isfinite(p)) throw DomainError("probability must be finite");
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

inline double bce(double p, bool y) {
  p = clamp_prob(p);
  return y ? -std::log(p) : -std::log1p(-p);
}

inline void require_shape(const RealGrid& pred, const BinaryMask& gt, const char* who) {
  if (pred.width() != gt.width() || pred.height() != gt.height())
    throw DomainError(std::string(who) + ": prediction and mask shapes differ");
}

}  // namespace loss_detail

inline double bce_pixel(const RealGrid& pred, const BinaryMask& gt) {
  loss_detail::require_shape(pred, gt, "bce_pixel");
  if (pred.empty()) throw DomainError("bce_pixel: empty grid");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    sum += loss_detail::bce(pred.values()[i], gt.bits()[i] != 0);
  return sum / double(pred.size());
}

inline double bce_scalar(double pred_score, int gt_label) {
  if (gt_label != 0 && gt_label != 1) throw DomainError("bce_scalar: label must be 0 or 1");
  return loss_detail::bce(pred_score, gt_label == 1);
}

/// -log softmax(logits)[label], stabilized by subtracting the max logit.
inline double cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size())
    throw DomainError("cross_entropy: label " + std::to_string(label) + " out of range");
  double peak = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) throw DomainError("cross_entropy: non-finite logit");
    peak = std::max(peak, z);
  }
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z - peak);
  return std::log(denom) - (logits[label] - peak);
}

inline double dice_loss(const RealGrid& pred, const BinaryMask& gt) {
  loss_detail::require_shape(pred, gt, "dice_loss");
  double inter = 0.0, sum_p = 0.0, sum_y = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred.values()[i];
    if (!std::isfinite(p)) throw DomainError("dice_loss: non-finite prediction");
    const double y = gt.bits()[i] ? 1.0 : 0.0;
    inter += p * y;
    sum_p += p;
    sum_y += y;
  }
  return 1.0 - (2.0 * inter + kDiceEpsilon) / (sum_p + sum_y + kDiceEpsilon);
}

inline double mse(const RealGrid& a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values()[i] - b[i];
    sum += d * d;
  }
  return a.empty() ? 0.0 : sum / double(a.size());
}

/// Heatmap supervision across scales. pred_maps[i] is compared against
/// target[i] pooled with strides[i]; scales are weighted equally.
inline double gh_loss(std::span<const RealGrid> pred_maps, const HeatmapStack& target,
                      std::span<const std::size_t> strides) {
  if (pred_maps.size() != target.size() || strides.size() != target.size())
    throw DomainError("gh_loss: need one prediction and one stride per target scale");
  if (target.size() == 0) throw DomainError("gh_loss: empty target stack");
  if (target[0].normalization() != Normalization::kMaxOne)
    throw DomainError("gh_loss: target stack must be max_one normalized");
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const Heatmap pooled = downsample_heatmap(target[i], strides[i]);
    if (pred_maps[i].width() != pooled.width() || pred_maps[i].height() != pooled.height())
      throw DomainError("gh_loss: prediction " + std::to_string(i) + " is " +
                        std::to_string(pred_maps[i].width()) + "x" +
                        std::to_string(pred_maps[i].height()) + ", target is " +
                        std::to_string(pooled.width()) + "x" +
                        std::to_string(pooled.height()));
    for (double v : pred_maps[i].values())
      if (!std::isfinite(v)) throw DomainError("gh_loss: non-finite prediction");
    sum += mse(pred_maps[i], pooled.values());
  }
  return sum / double(target.size());
}

struct LossWeights {
  double cls = 0.2;
  double obj = 0.2;
  double mask = 0.2;
  double dice = 0.2;
  double gh = 0.2;

  void validate() const {
    for (double w : {cls, obj, mask, dice, gh})
      if (!std::isfinite(w) || w < 0.0) throw DomainError("loss weights must be finite and >= 0");
  }
};

struct LossParts {
  double cls = 0.0;
  double obj = 0.0;
  double mask = 0.0;
  double dice = 0.0;
  double gh = 0.0;
};

struct LossBreakdown {
  double cls = 0.0;
  double obj = 0.0;
  double mask = 0.0;
  double dice = 0.0;
  double gh = 0.0;
  double total = 0.0;
};

inline LossBreakdown total_loss(const LossParts& parts, const LossWeights& w = {}) {
  w.validate();
  for (double p : {parts.cls, parts.obj, parts.mask, parts.dice, parts.gh})
    if (!std::isfinite(p) || p < 0.0) throw DomainError("loss terms must be finite and >= 0");
  LossBreakdown out{parts.cls, parts.obj, parts.mask, parts.dice, parts.gh, 0.0};
  out.total = w.cls * parts.cls + w.obj * parts.obj + w.mask * parts.mask +
              w.dice * parts.dice + w.gh * parts.gh;
  return out;
}

}  // namespace pgmkit

#endif  // PGMKIT_LOSSES_HPP_

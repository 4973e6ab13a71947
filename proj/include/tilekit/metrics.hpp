// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "tilekit/dataset.hpp"
#include "tilekit/detector.hpp"
#include "tilekit/errors.hpp"
#include "tilekit/fusion.hpp"
#include "tilekit/geometry.hpp"

namespace tilekit {

enum class MatchMode { centroid_in_box, iou_at };

/// True-positive criterion. centroid_in_box suits centroid/grid pipelines,
/// iou_at box pipelines.
struct MatchConfig {
  MatchMode mode = MatchMode::iou_at;
  double iou_threshold = 0.5;
};

/// Outcome of matching one image's predictions against its ground truth.
struct GtMatch {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<int> pred_to_gt;  ///< per prediction (confidence-sorted), matched GT index or -1
};

/**
 * @brief Greedy one-to-one matching of predictions to ground truth.
 *
 * Predictions are taken in descending confidence (ties broken by canonical
 * box order). centroid_in_box: a prediction claims the first unmatched GT
 * box of its class containing the prediction's center (boundary inclusive).
 * iou_at: it claims the unmatched GT with the highest IoU if that reaches
 * the threshold. Every GT is matched at most once.
 */
inline GtMatch match_to_gt(std::vector<Detection> preds, const ImageAnnotations& gt,
                           const MatchConfig& cfg = {}) {
  std::sort(preds.begin(), preds.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return detail::canonical_less(a, b);
  });

  // Deterministic GT visit order regardless of annotation file order.
  std::vector<std::size_t> gt_order(gt.boxes.size());
  for (std::size_t i = 0; i < gt_order.size(); ++i) gt_order[i] = i;
  std::sort(gt_order.begin(), gt_order.end(), [&](std::size_t a, std::size_t b) {
    const auto key = [&](std::size_t i) {
      const auto& lb = gt.boxes[i];
      return std::make_tuple(lb.class_id, lb.box.y_min, lb.box.x_min, lb.box.y_max,
                             lb.box.x_max);
    };
    return key(a) < key(b);
  });

  std::vector<bool> taken(gt.boxes.size(), false);
  GtMatch m;
  m.pred_to_gt.assign(preds.size(), -1);

  for (std::size_t p = 0; p < preds.size(); ++p) {
    const Detection& det = preds[p];
    int hit = -1;
    if (cfg.mode == MatchMode::centroid_in_box) {
      const double cx = det.box.center_x(), cy = det.box.center_y();
      for (std::size_t gi : gt_order) {
        if (taken[gi] || gt.boxes[gi].class_id != det.class_id) continue;
        if (gt.boxes[gi].box.contains(cx, cy)) {
          hit = static_cast<int>(gi);
          break;
        }
      }
    } else {
      double best = 0.0;
      for (std::size_t gi : gt_order) {
        if (taken[gi] || gt.boxes[gi].class_id != det.class_id) continue;
        const double v = iou(det.box, gt.boxes[gi].box);
        if (v > best) {
          best = v;
          hit = static_cast<int>(gi);
        }
      }
      if (best < cfg.iou_threshold) hit = -1;
    }
    if (hit >= 0) {
      taken[static_cast<std::size_t>(hit)] = true;
      m.pred_to_gt[p] = hit;
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  m.fn = static_cast<int>(gt.boxes.size()) - m.tp;
  return m;
}

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Standard precision/recall/F1 with 0/0 defined as 0.
inline Prf prf1(int tp, int fp, int fn) {
  Prf r;
  r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

/// Mean absolute count error over (predicted, ground-truth) pairs.
inline double count_mae(const std::vector<std::pair<int, int>>& counts) {
  if (counts.empty()) throw validation_error("count_mae: empty count list");
  double sum = 0.0;
  for (const auto& [pred, gt] : counts) sum += std::abs(pred - gt);
  return sum / static_cast<double>(counts.size());
}

/// Per-image tally plus derived aggregate rates.
struct ImageEval {
  std::string image_id;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int pred_count = 0;
  int gt_count = 0;
};

struct EvalReport {
  std::vector<ImageEval> per_image;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double count_mae = 0.0;
};

/// Aggregate evaluation: counts sum across images, rates derive from the
/// sums, count MAE averages per-image absolute count errors.
inline EvalReport evaluate(const std::vector<ImageAnnotations>& gts,
                           const std::vector<std::vector<Detection>>& preds,
                           const MatchConfig& cfg = {}) {
  if (gts.size() != preds.size())
    throw validation_error("evaluate: prediction list count does not match image count");
  if (gts.empty()) throw validation_error("evaluate: empty dataset");
  EvalReport rep;
  std::vector<std::pair<int, int>> counts;
  counts.reserve(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const GtMatch m = match_to_gt(preds[i], gts[i], cfg);
    ImageEval ie;
    ie.image_id = gts[i].image_id;
    ie.tp = m.tp;
    ie.fp = m.fp;
    ie.fn = m.fn;
    ie.pred_count = static_cast<int>(preds[i].size());
    ie.gt_count = static_cast<int>(gts[i].boxes.size());
    rep.tp += m.tp;
    rep.fp += m.fp;
    rep.fn += m.fn;
    counts.emplace_back(ie.pred_count, ie.gt_count);
    rep.per_image.push_back(std::move(ie));
  }
  const Prf p = prf1(rep.tp, rep.fp, rep.fn);
  rep.precision = p.precision;
  rep.recall = p.recall;
  rep.f1 = p.f1;
  rep.count_mae = count_mae(counts);
  return rep;
}

/// Soft F1 loss value and its analytic gradient w.r.t. the scores.
struct LossResult {
  double loss = 0.0;
  std::vector<double> gradient;  ///< same layout as GridPrediction::scores
};

/**
 * @brief Differentiable F1 surrogate over a score grid.
 *
 * Per class: tp = sum p*y, fp = sum p*(1-y), fn = sum (1-p)*y,
 * softF1 = 2tp / (2tp + fp + fn + eps), loss = 1 - mean over classes.
 * Background is not a class here; the mean runs over object channels only.
 * The gradient is the closed form of the rational function: with
 * D = 2tp + fp + fn + eps (note dD/dp = 1 for every cell),
 * d(loss)/dp_i = -(2*y_i*D - 2*tp) / (C * D^2).
 */
inline LossResult soft_f1_loss(const GridPrediction& scores, const GridPrediction& targets,
                               double eps = 1e-7) {
  if (scores.grid_n != targets.grid_n || scores.num_classes != targets.num_classes)
    throw validation_error("soft_f1_loss: score and target shapes differ");
  for (double p : scores.scores)
    if (!(p >= 0.0 && p <= 1.0))
      throw validation_error("soft_f1_loss: score outside [0, 1]");
  for (double y : targets.scores)
    if (y != 0.0 && y != 1.0)
      throw validation_error("soft_f1_loss: targets must be 0 or 1");

  const int C = scores.num_classes;
  const std::size_t cells = static_cast<std::size_t>(scores.grid_n) *
                            static_cast<std::size_t>(scores.grid_n);
  std::vector<double> tp(static_cast<std::size_t>(C), 0.0);
  std::vector<double> denom(static_cast<std::size_t>(C), 0.0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (int c = 0; c < C; ++c) {
      const std::size_t k = cell * static_cast<std::size_t>(C) + static_cast<std::size_t>(c);
      const double p = scores.scores[k];
      const double y = targets.scores[k];
      tp[static_cast<std::size_t>(c)] += p * y;
      // 2tp + fp + fn telescopes to sum(p + y)
      denom[static_cast<std::size_t>(c)] += p + y;
    }
  }

  LossResult res;
  double mean_f1 = 0.0;
  std::vector<double> D(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    D[static_cast<std::size_t>(c)] = denom[static_cast<std::size_t>(c)] + eps;
    mean_f1 += 2.0 * tp[static_cast<std::size_t>(c)] / D[static_cast<std::size_t>(c)];
  }
  mean_f1 /= C;
  res.loss = 1.0 - mean_f1;

  res.gradient.assign(scores.scores.size(), 0.0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (int c = 0; c < C; ++c) {
      const std::size_t k = cell * static_cast<std::size_t>(C) + static_cast<std::size_t>(c);
      const double y = targets.scores[k];
      const double Dc = D[static_cast<std::size_t>(c)];
      res.gradient[k] = -(2.0 * y * Dc - 2.0 * tp[static_cast<std::size_t>(c)]) / (C * Dc * Dc);
    }
  }
  return res;
}

}  // namespace tilekit

// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tilekit/cost.hpp"
#include "tilekit/dataset.hpp"
#include "tilekit/detector.hpp"
#include "tilekit/fusion.hpp"
#include "tilekit/io.hpp"
#include "tilekit/metrics.hpp"
#include "tilekit/parallel.hpp"
#include "tilekit/tiling.hpp"

namespace tilekit {

/**
 * @brief Plan every image of a dataset at one target NBA.
 *
 * Per-image object statistics drive Eq-style tile sizing; images without
 * usable ground truth fall back to dataset-level statistics, and an
 * explicit i_nba override (external size estimate) replaces both.
 */
inline std::vector<TilePlan> plan_dataset(const std::vector<ImageAnnotations>& images,
                                          Nba t_nba, int input_resolution,
                                          std::optional<Nba> i_nba_override = std::nullopt,
                                          int max_tiles = 1024, unsigned workers = 1) {
  if (images.empty()) throw validation_error("plan: empty dataset");
  std::optional<ObjectStats> fallback;
  if (!i_nba_override) {
    try {
      fallback = dataset_object_stats(images);
    } catch (const validation_error&) {
    }
  }
  std::vector<TilePlan> plans(images.size());
  parallel_for(images.size(), workers, [&](std::size_t i) {
    const auto& img = images[i];
    Nba i_nba{1.0};
    double extent = 0.0;
    if (i_nba_override) {
      i_nba = *i_nba_override;
      extent = std::sqrt(i_nba.value * img.dims.area());
    } else {
      ObjectStats stats{};
      bool have = false;
      if (!img.boxes.empty()) {
        try {
          stats = object_stats(img, img.dims);
          have = true;
        } catch (const validation_error&) {
        }
      }
      if (!have) {
        if (!fallback)
          throw validation_error("plan: image '" + img.image_id +
                                 "' has no objects and no fallback statistics exist");
        stats = *fallback;
      }
      i_nba = stats.mean_nba;
      extent = stats.mean_extent;
    }
    const int tile = compute_tile_size(img.dims, i_nba, t_nba, input_resolution);
    plans[i] = plan_tiles(img.image_id, img.dims, tile, extent, input_resolution, max_tiles);
  });
  return plans;
}

/// Reorder manifest plans to follow the dataset's image order. Every image
/// must have exactly one plan.
inline std::vector<TilePlan> align_plans(const std::vector<ImageAnnotations>& images,
                                         const std::vector<TilePlan>& plans) {
  std::map<std::string, const TilePlan*> by_id;
  for (const auto& p : plans)
    if (!by_id.emplace(p.image_id, &p).second)
      throw validation_error("manifest has duplicate plan for image '" + p.image_id + "'");
  std::vector<TilePlan> out;
  out.reserve(images.size());
  for (const auto& img : images) {
    const auto it = by_id.find(img.image_id);
    if (it == by_id.end())
      throw validation_error("manifest has no plan for image '" + img.image_id + "'");
    out.push_back(*it->second);
  }
  return out;
}

enum class DetectorMode { box, grid };

/**
 * @brief Run the simulated detector over every tile of every plan.
 *
 * box mode emits tile-clipped boxes; grid mode runs the centroid detector
 * and emits one record per active cell (its 8x8 input-pixel square, score
 * as confidence) above score_threshold. Both land in the same predictions
 * structure, keyed by image and tile.
 */
inline std::map<std::string, TileDetections> simulate_dataset(
    const std::vector<ImageAnnotations>& images, const std::vector<TilePlan>& plans,
    const SimDetectorConfig& cfg, DetectorMode mode = DetectorMode::box,
    double score_threshold = 0.5, unsigned workers = 1) {
  if (images.size() != plans.size())
    throw validation_error("simulate: dataset and manifest image counts differ");
  for (std::size_t i = 0; i < images.size(); ++i)
    if (images[i].image_id != plans[i].image_id)
      throw validation_error("simulate: dataset/manifest image id mismatch at index " +
                             std::to_string(i) + " ('" + images[i].image_id + "' vs '" +
                             plans[i].image_id + "')");

  std::vector<TileDetections> results(images.size());
  parallel_for(images.size(), workers, [&](std::size_t i) {
    const auto& plan = plans[i];
    TileDetections per_tile;
    for (const auto& tile : plan.tiles) {
      std::vector<Detection> dets;
      if (mode == DetectorMode::box) {
        dets = simulate_tile(images[i], plan, tile.col, tile.row, cfg);
      } else {
        const GridPrediction gp = simulate_grid(images[i], plan, tile.col, tile.row, cfg);
        for (int r = 0; r < gp.grid_n; ++r)
          for (int c = 0; c < gp.grid_n; ++c)
            for (int ch = 0; ch < gp.num_classes; ++ch) {
              const double s = gp.at(r, c, ch);
              if (s < score_threshold) continue;
              dets.push_back({ch + 1, BBox(c * 8.0, r * 8.0, (c + 1) * 8.0, (r + 1) * 8.0), s,
                              std::make_pair(tile.col, tile.row)});
            }
      }
      if (!dets.empty()) per_tile.emplace(std::make_pair(tile.col, tile.row), std::move(dets));
    }
    results[i] = std::move(per_tile);
  });

  std::map<std::string, TileDetections> out;
  for (std::size_t i = 0; i < images.size(); ++i)
    out.emplace(images[i].image_id, std::move(results[i]));
  return out;
}

enum class FuseMode { cross_tile, adjacency_baseline };

/**
 * @brief Remap per-tile detections to image coordinates and fuse duplicates.
 *
 * cross_tile pools all tiles of an image and runs match/cluster/reduce.
 * adjacency_baseline instead joins neighboring-cell predictions within each
 * tile and never fuses across tiles (the original centroid-detector rule,
 * kept for ablations).
 */
inline std::map<std::string, std::vector<Detection>> fuse_dataset(
    const std::vector<TilePlan>& plans,
    const std::map<std::string, TileDetections>& predictions, const FusionConfig& cfg,
    FuseMode mode = FuseMode::cross_tile, unsigned workers = 1) {
  std::vector<std::vector<Detection>> fused(plans.size());
  parallel_for(plans.size(), workers, [&](std::size_t i) {
    const TilePlan& plan = plans[i];
    const auto pit = predictions.find(plan.image_id);
    if (pit == predictions.end()) return;  // image with no detections
    if (mode == FuseMode::cross_tile) {
      std::vector<Detection> pooled;
      for (const auto& [tile, dets] : pit->second) {
        for (const auto& d : dets) {
          Detection g = d;
          g.box = tile_to_global(plan, tile.first, tile.second, d.box);
          pooled.push_back(std::move(g));
        }
      }
      fused[i] = fuse(std::move(pooled), cfg);
    } else {
      std::vector<Detection> pooled;
      for (const auto& [tile, dets] : pit->second) {
        std::vector<Detection> global;
        global.reserve(dets.size());
        for (const auto& d : dets) {
          Detection g = d;
          g.box = tile_to_global(plan, tile.first, tile.second, d.box);
          global.push_back(std::move(g));
        }
        for (auto& d : adjacency_fuse(global)) pooled.push_back(std::move(d));
      }
      detail::canonical_sort(pooled);
      fused[i] = std::move(pooled);
    }
  });

  std::map<std::string, std::vector<Detection>> out;
  for (std::size_t i = 0; i < plans.size(); ++i)
    out.emplace(plans[i].image_id, std::move(fused[i]));
  return out;
}

/// Match fused detections to ground truth for every image.
inline EvalReport evaluate_dataset(const std::vector<ImageAnnotations>& images,
                                   const std::map<std::string, std::vector<Detection>>& fused,
                                   const MatchConfig& cfg = {}, unsigned workers = 1) {
  if (images.empty()) throw validation_error("eval: empty dataset");
  std::vector<GtMatch> matches(images.size());
  static const std::vector<Detection> kNone;
  parallel_for(images.size(), workers, [&](std::size_t i) {
    const auto it = fused.find(images[i].image_id);
    matches[i] = match_to_gt(it != fused.end() ? it->second : kNone, images[i], cfg);
  });

  EvalReport rep;
  std::vector<std::pair<int, int>> counts;
  counts.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto it = fused.find(images[i].image_id);
    const int pred_count = it != fused.end() ? static_cast<int>(it->second.size()) : 0;
    ImageEval ie{images[i].image_id, matches[i].tp, matches[i].fp, matches[i].fn, pred_count,
                 static_cast<int>(images[i].boxes.size())};
    rep.tp += ie.tp;
    rep.fp += ie.fp;
    rep.fn += ie.fn;
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

/// One row of a sweep table, mirrored into JSON and CSV outputs.
struct SweepRow {
  double target_nba = 0.0;
  std::string strategy;
  double avg_tiles = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double count_mae = 0.0;
  std::optional<double> fps;
};

struct SweepSettings {
  std::vector<double> nba_values;  ///< fractions
  std::vector<std::string> strategies;  ///< "iou" / "one_way_ratio"
  int input_resolution = 192;
  SimDetectorConfig sim;
  DetectorMode detector_mode = DetectorMode::box;
  double score_threshold = 0.5;
  ReducePolicy reduce_policy = ReducePolicy::largest_box;
  std::optional<double> iou_threshold;      ///< default per strategy when unset
  std::optional<double> one_way_threshold;  ///< default per strategy when unset
  MatchConfig matching;
  std::optional<DeviceProfile> profile;
  double overhead_per_image = 0.0;
  int max_tiles = 1024;
  unsigned workers = 1;
};

inline MatchStrategy strategy_from_name(const std::string& name) {
  if (name == "iou") return MatchStrategy::iou;
  if (name == "one_way_ratio") return MatchStrategy::one_way_ratio;
  throw validation_error("unknown fusion strategy '" + name +
                         "' (expected iou or one_way_ratio)");
}

/**
 * @brief Full pipeline per (target NBA, strategy): plan, simulate, fuse,
 *        evaluate, and estimate throughput when a profile is given.
 */
inline std::vector<SweepRow> sweep_dataset(const std::vector<ImageAnnotations>& images,
                                           const SweepSettings& s) {
  if (s.nba_values.empty()) throw validation_error("sweep: empty target NBA list");
  if (s.strategies.empty()) throw validation_error("sweep: empty strategy list");
  std::vector<SweepRow> rows;
  for (const double nba : s.nba_values) {
    const Nba target(nba);
    const auto plans =
        plan_dataset(images, target, s.input_resolution, std::nullopt, s.max_tiles, s.workers);
    double tiles = 0.0;
    for (const auto& p : plans) tiles += static_cast<double>(p.tile_count());
    tiles /= static_cast<double>(plans.size());

    const auto preds = simulate_dataset(images, plans, s.sim, s.detector_mode,
                                        s.score_threshold, s.workers);
    for (const auto& name : s.strategies) {
      FusionConfig fc;
      fc.strategy = strategy_from_name(name);
      fc.reduce_policy = s.reduce_policy;
      if (fc.strategy == MatchStrategy::iou)
        fc.threshold = s.iou_threshold.value_or(default_threshold(fc.strategy));
      else
        fc.threshold = s.one_way_threshold.value_or(default_threshold(fc.strategy));

      const auto fused = fuse_dataset(plans, preds, fc, FuseMode::cross_tile, s.workers);
      const EvalReport rep = evaluate_dataset(images, fused, s.matching, s.workers);

      SweepRow row;
      row.target_nba = nba;
      row.strategy = name;
      row.avg_tiles = tiles;
      row.f1 = rep.f1;
      row.precision = rep.precision;
      row.recall = rep.recall;
      row.count_mae = rep.count_mae;
      if (s.profile) row.fps = estimate(tiles, *s.profile, s.overhead_per_image).fps;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace tilekit

// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "tilekit/dataset.hpp"
#include "tilekit/errors.hpp"
#include "tilekit/geometry.hpp"
#include "tilekit/rng.hpp"
#include "tilekit/tiling.hpp"

namespace tilekit {

/// One detection: class, box, confidence, and (for per-tile results) the
/// tile it came from. Boxes are in tile-input coordinates while per-tile
/// and in image coordinates after remapping.
struct Detection {
  int class_id = 1;
  BBox box;
  double confidence = 1.0;
  std::optional<std::pair<int, int>> source_tile;  ///< (col, row)
};

/**
 * @brief Dense per-cell class scores of a centroid detector: an n x n grid,
 *        C channels, scores in [0, 1].
 *
 * The grid is the network input downsampled by 8, so grid_n must equal
 * input_resolution / 8.
 */
struct GridPrediction {
  int grid_n = 0;
  int num_classes = 0;
  std::vector<double> scores;  ///< row-major (row, col, class)

  GridPrediction() = default;
  GridPrediction(int n, int classes)
      : grid_n(n), num_classes(classes),
        scores(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
               static_cast<std::size_t>(classes), 0.0) {
    if (n < 1 || classes < 1)
      throw validation_error("GridPrediction: grid_n and num_classes must be >= 1");
  }

  double at(int row, int col, int cls) const { return scores[index(row, col, cls)]; }
  double& at(int row, int col, int cls) { return scores[index(row, col, cls)]; }

  std::size_t index(int row, int col, int cls) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(grid_n) +
            static_cast<std::size_t>(col)) * static_cast<std::size_t>(num_classes) +
           static_cast<std::size_t>(cls);
  }
};

/**
 * @brief Simulated detector knobs.
 *
 * A perfect detector is (0, 0, 0): every sufficiently visible object is
 * reported exactly as its tile-clipped box. miss_rate drops detections,
 * jitter_sigma perturbs box corners (as a fraction of object extent),
 * fp_per_tile adds Poisson false positives. Randomness is keyed by
 * (seed, image_id, tile), never by call order.
 */
struct SimDetectorConfig {
  double miss_rate = 0.0;        ///< [0, 1)
  double jitter_sigma = 0.0;     ///< fraction of box extent, >= 0
  double fp_per_tile = 0.0;      ///< Poisson mean, >= 0
  double visibility_threshold = 0.25;  ///< min intersection_ratio(gt, tile)
  std::uint64_t seed = 0;

  void validate() const {
    if (miss_rate < 0.0 || miss_rate >= 1.0)
      throw validation_error("sim: miss_rate must be in [0, 1)");
    if (jitter_sigma < 0.0) throw validation_error("sim: jitter_sigma must be >= 0");
    if (fp_per_tile < 0.0) throw validation_error("sim: fp_per_tile must be >= 0");
    if (visibility_threshold < 0.0 || visibility_threshold > 1.0)
      throw validation_error("sim: visibility_threshold must be in [0, 1]");
  }
};

namespace detail {

inline std::vector<int> image_classes(const ImageAnnotations& gt) {
  std::set<int> cls;
  for (const auto& lb : gt.boxes) cls.insert(lb.class_id);
  if (cls.empty()) return {1};
  return {cls.begin(), cls.end()};
}

/// Put min/max back in order after corner jitter.
inline BBox normalized_box(double x0, double y0, double x1, double y1) {
  if (x1 < x0) std::swap(x0, x1);
  if (y1 < y0) std::swap(y0, y1);
  return BBox(x0, y0, x1, y1);
}

}  // namespace detail

/**
 * @brief Simulate a box detector on one tile.
 *
 * Every ground-truth box whose visible fraction inside the tile reaches the
 * threshold yields (with probability 1 - miss_rate) a detection equal to the
 * tile-clipped box in network-input coordinates, corners jittered by
 * jitter_sigma * extent. Poisson(fp_per_tile) false positives are added.
 * Confidence is 1 minus the applied jitter fraction (clamped to [0.5, 1]);
 * false positives draw confidence from [0.3, 0.7).
 */
inline std::vector<Detection> simulate_tile(const ImageAnnotations& gt, const TilePlan& plan,
                                            int col, int row, const SimDetectorConfig& cfg) {
  cfg.validate();
  const Tile& tile = plan.tile_at(col, row);
  Rng rng = Rng::keyed(cfg.seed, gt.image_id, col, row, "box");

  std::vector<Detection> out;
  for (const auto& lb : gt.boxes) {
    if (lb.box.area() <= 0.0) continue;
    if (intersection_ratio(lb.box, tile.rect) < cfg.visibility_threshold) continue;
    const auto clipped = clip(lb.box, tile.rect);
    if (!clipped || clipped->area() <= 0.0) continue;

    const double miss_draw = rng.uniform();
    if (miss_draw < cfg.miss_rate) continue;

    BBox local = global_to_tile(plan, col, row, *clipped);
    double confidence = 1.0;
    if (cfg.jitter_sigma > 0.0) {
      const double extent = std::sqrt(local.area());
      double d[4];
      for (double& v : d) v = rng.gauss() * cfg.jitter_sigma * extent;
      local = detail::normalized_box(local.x_min + d[0], local.y_min + d[1],
                                     local.x_max + d[2], local.y_max + d[3]);
      const double frac =
          extent > 0.0
              ? (std::abs(d[0]) + std::abs(d[1]) + std::abs(d[2]) + std::abs(d[3])) / (4.0 * extent)
              : 0.0;
      confidence = std::clamp(1.0 - frac, 0.5, 1.0);
    }
    out.push_back({lb.class_id, local, confidence, std::make_pair(col, row)});
  }

  const int fps = rng.poisson(cfg.fp_per_tile);
  const auto classes = detail::image_classes(gt);
  const double r = plan.input_resolution;
  for (int k = 0; k < fps; ++k) {
    const double w = rng.uniform(0.02 * r, 0.15 * r);
    const double h = rng.uniform(0.02 * r, 0.15 * r);
    const double x = rng.uniform(0.0, r - w);
    const double y = rng.uniform(0.0, r - h);
    const double conf = rng.uniform(0.3, 0.7);
    const int cls = classes[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(classes.size()) - 1))];
    out.push_back({cls, BBox(x, y, x + w, y + h), conf, std::make_pair(col, row)});
  }
  return out;
}

/**
 * @brief Simulate a centroid detector on one tile: score 1.0 in every grid
 *        cell containing a visible object center, 0 elsewhere.
 *
 * Jitter moves the center before quantization; false positives activate
 * random cells with scores in [0.3, 0.7). Two objects landing in one cell
 * collapse into a single activation.
 */
inline GridPrediction simulate_grid(const ImageAnnotations& gt, const TilePlan& plan, int col,
                                    int row, const SimDetectorConfig& cfg, int num_classes = 0) {
  cfg.validate();
  const Tile& tile = plan.tile_at(col, row);
  if (plan.input_resolution % 8 != 0)
    throw validation_error("grid detector requires input_resolution divisible by 8, got " +
                           std::to_string(plan.input_resolution));
  const int n = plan.input_resolution / 8;
  if (num_classes <= 0) {
    num_classes = 1;
    for (const auto& lb : gt.boxes) num_classes = std::max(num_classes, lb.class_id);
  }
  GridPrediction grid(n, num_classes);
  Rng rng = Rng::keyed(cfg.seed, gt.image_id, col, row, "grid");

  for (const auto& lb : gt.boxes) {
    if (lb.box.area() <= 0.0) continue;
    if (lb.class_id > num_classes)
      throw validation_error("class id " + std::to_string(lb.class_id) +
                             " exceeds grid channel count " + std::to_string(num_classes));
    if (intersection_ratio(lb.box, tile.rect) < cfg.visibility_threshold) continue;
    const auto clipped = clip(lb.box, tile.rect);
    if (!clipped || clipped->area() <= 0.0) continue;

    const double miss_draw = rng.uniform();
    if (miss_draw < cfg.miss_rate) continue;

    const BBox local = global_to_tile(plan, col, row, *clipped);
    double cx = local.center_x();
    double cy = local.center_y();
    if (cfg.jitter_sigma > 0.0) {
      const double extent = std::sqrt(local.area());
      cx += rng.gauss() * cfg.jitter_sigma * extent;
      cy += rng.gauss() * cfg.jitter_sigma * extent;
    }
    const int cell_x = std::clamp(static_cast<int>(std::floor(cx / 8.0)), 0, n - 1);
    const int cell_y = std::clamp(static_cast<int>(std::floor(cy / 8.0)), 0, n - 1);
    grid.at(cell_y, cell_x, lb.class_id - 1) = 1.0;
  }

  const int fps = rng.poisson(cfg.fp_per_tile);
  for (int k = 0; k < fps; ++k) {
    const int cell_x = static_cast<int>(rng.uniform_int(0, n - 1));
    const int cell_y = static_cast<int>(rng.uniform_int(0, n - 1));
    const int ch = static_cast<int>(rng.uniform_int(0, num_classes - 1));
    const double s = rng.uniform(0.3, 0.7);
    grid.at(cell_y, cell_x, ch) = std::max(grid.at(cell_y, cell_x, ch), s);
  }
  return grid;
}

}  // namespace tilekit

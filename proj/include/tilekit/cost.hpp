// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tilekit/dataset.hpp"
#include "tilekit/errors.hpp"
#include "tilekit/tiling.hpp"

namespace tilekit {

/// Measured per-tile inference cost of a (network, input resolution) pair on
/// a specific device. input_resolution 0 means "not recorded".
struct DeviceProfile {
  std::string name;
  std::string network;
  int input_resolution = 0;
  double latency_per_tile = 0.0;  ///< seconds
  double energy_per_tile = 0.0;   ///< joules; 0 when not measured
  std::string source;

  void validate() const {
    if (latency_per_tile <= 0.0)
      throw validation_error("profile '" + name + "': latency_per_tile must be > 0");
    if (energy_per_tile < 0.0)
      throw validation_error("profile '" + name + "': energy_per_tile must be >= 0");
  }
};

/// Per-image cost of running one inference per tile, sequentially.
struct CostEstimate {
  double avg_tiles = 0.0;
  double latency_per_image = 0.0;  ///< seconds
  double fps = 0.0;
  double energy_per_image = 0.0;   ///< joules
};

/**
 * @brief Throughput arithmetic: latency = tiles * per-tile latency (+ fixed
 *        per-image overhead), fps its reciprocal, energy scales the same way.
 */
inline CostEstimate estimate(double avg_tiles, const DeviceProfile& profile,
                             double overhead_per_image = 0.0) {
  if (avg_tiles <= 0.0) throw validation_error("estimate: avg_tiles must be > 0");
  if (overhead_per_image < 0.0) throw validation_error("estimate: overhead must be >= 0");
  profile.validate();
  CostEstimate e;
  e.avg_tiles = avg_tiles;
  e.latency_per_image = avg_tiles * profile.latency_per_tile + overhead_per_image;
  e.fps = 1.0 / e.latency_per_image;
  e.energy_per_image = avg_tiles * profile.energy_per_tile;
  return e;
}

/**
 * @brief Mean tiles per image when planning the dataset at a target NBA.
 *
 * Each image plans with its own object statistics; images without usable
 * ground truth fall back to the dataset-level mean. An explicit i_nba
 * override (an external size estimate) replaces the statistics entirely.
 */
inline double avg_tiles(const std::vector<ImageAnnotations>& images, Nba t_nba,
                        int input_resolution, std::optional<Nba> i_nba_override = std::nullopt,
                        int max_tiles = 1024) {
  if (images.empty()) throw validation_error("avg_tiles: empty dataset");

  std::optional<ObjectStats> fallback;
  if (!i_nba_override) {
    try {
      fallback = dataset_object_stats(images);
    } catch (const validation_error&) {
      // No boxes anywhere; only the override could save us below.
    }
  }

  double total = 0.0;
  for (const auto& img : images) {
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
          have = false;
        }
      }
      if (!have) {
        if (!fallback)
          throw validation_error("avg_tiles: image '" + img.image_id +
                                 "' has no objects and the dataset has no fallback stats");
        stats = *fallback;
      }
      i_nba = stats.mean_nba;
      extent = stats.mean_extent;
    }
    const int tile = compute_tile_size(img.dims, i_nba, t_nba, input_resolution);
    const TilePlan plan =
        plan_tiles(img.image_id, img.dims, tile, extent, input_resolution, max_tiles);
    total += static_cast<double>(plan.tile_count());
  }
  return total / static_cast<double>(images.size());
}

}  // namespace tilekit

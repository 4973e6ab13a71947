// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tilekit/dataset.hpp"
#include "tilekit/errors.hpp"
#include "tilekit/geometry.hpp"

namespace tilekit {

/// One square tile of a plan, addressed by (col, row).
struct Tile {
  int col = 0;
  int row = 0;
  BBox rect;
};

/**
 * @brief Overlapping square tiling of one image plus the network input
 *        resolution the tiles get resampled to.
 *
 * Tiles are stored row-major by (row, col); their union covers the image
 * and adjacent tiles overlap by at least min_overlap (up to 1 px rounding
 * slack). Immutable after construction.
 */
struct TilePlan {
  std::string image_id;
  ImageDims dims;
  int tile_size = 0;
  int grid_x = 0;
  int grid_y = 0;
  std::vector<Tile> tiles;
  int input_resolution = 0;
  double min_overlap = 0.0;

  const Tile& tile_at(int col, int row) const {
    if (col < 0 || col >= grid_x || row < 0 || row >= grid_y)
      throw validation_error("unknown tile index (" + std::to_string(col) + "," +
                             std::to_string(row) + ") of " + std::to_string(grid_x) + "x" +
                             std::to_string(grid_y) + " plan for image '" + image_id + "'");
    return tiles[static_cast<std::size_t>(row) * static_cast<std::size_t>(grid_x) +
                 static_cast<std::size_t>(col)];
  }

  std::size_t tile_count() const { return tiles.size(); }
};

/// Mean object size over one image or a whole dataset.
struct ObjectStats {
  Nba mean_nba;          ///< mean of per-object box area / image area
  double mean_extent = 0.0;  ///< sqrt of mean box area, pixels
};

/// Mean NBA and extent over one image's ground truth.
inline ObjectStats object_stats(const ImageAnnotations& ann, ImageDims dims) {
  if (ann.boxes.empty())
    throw validation_error("no objects; tile size undefined (image '" + ann.image_id + "')");
  double sum_area = 0.0;
  for (const auto& lb : ann.boxes) sum_area += lb.box.area();
  const double mean_area = sum_area / static_cast<double>(ann.boxes.size());
  if (mean_area <= 0.0)
    throw validation_error("no objects with positive area; tile size undefined (image '" +
                           ann.image_id + "')");
  return {Nba(mean_area / dims.area()), std::sqrt(mean_area)};
}

/// Dataset-level fallback: pools every box, each normalized by its own image.
inline ObjectStats dataset_object_stats(const std::vector<ImageAnnotations>& images) {
  double sum_nba = 0.0, sum_area = 0.0;
  std::size_t n = 0;
  for (const auto& img : images) {
    for (const auto& lb : img.boxes) {
      sum_nba += lb.box.area() / img.dims.area();
      sum_area += lb.box.area();
      ++n;
    }
  }
  if (n == 0 || sum_area <= 0.0)
    throw validation_error("no objects in dataset; tile size undefined");
  return {Nba(sum_nba / static_cast<double>(n)), std::sqrt(sum_area / static_cast<double>(n))};
}

/// Square tile side, pre-clamp and pre-round: sqrt(image_area * i_nba / t_nba).
inline double tile_size_raw(ImageDims dims, Nba i_nba, Nba t_nba) {
  return std::sqrt(dims.area() * i_nba.value / t_nba.value);
}

/**
 * @brief Tile side in integer pixels: the raw value clamped to
 *        [input_resolution, min(width, height)] and rounded half-up.
 *
 * The lower clamp avoids upsampling tiles smaller than the network input;
 * the upper clamp keeps tiles inside the image. When the image itself is
 * smaller than the input resolution the upper bound wins.
 */
inline int compute_tile_size(ImageDims dims, Nba i_nba, Nba t_nba, int input_resolution) {
  if (input_resolution < 1) throw validation_error("input_resolution must be >= 1");
  const double raw = tile_size_raw(dims, i_nba, t_nba);
  double lo = static_cast<double>(input_resolution);
  const double hi = static_cast<double>(std::min(dims.width, dims.height));
  if (lo > hi) lo = hi;
  const double clamped = std::clamp(raw, lo, hi);
  return static_cast<int>(std::floor(clamped + 0.5));
}

namespace detail {

/**
 * Offsets of tiles along one axis. The tile count is the smallest
 * n >= ceil(length / tile_size) whose average adjacent overlap
 * (n*tile_size - length) / (n-1) reaches min_overlap; offsets are evenly
 * spaced and rounded half-up, which pins the first tile at 0 and the last
 * at length - tile_size.
 */
inline std::vector<int> plan_axis(int length, int tile_size, double min_overlap, int cap) {
  if (tile_size >= length) return {0};
  int n = static_cast<int>(std::ceil(static_cast<double>(length) / tile_size));
  if (n < 2) n = 2;
  while ((static_cast<double>(n) * tile_size - length) / static_cast<double>(n - 1) <
         min_overlap) {
    ++n;
    if (n > cap)
      throw validation_error("degenerate overlap demand: axis of length " +
                             std::to_string(length) + " needs more than " + std::to_string(cap) +
                             " tiles of size " + std::to_string(tile_size) + " for overlap " +
                             std::to_string(min_overlap));
  }
  std::vector<int> offsets(static_cast<std::size_t>(n));
  const double stride = static_cast<double>(length - tile_size) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i)
    offsets[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(i * stride + 0.5));
  return offsets;
}

}  // namespace detail

/**
 * @brief Plan overlapping square tiles covering the image.
 *
 * Adjacent tiles overlap by at least 1.5x the mean object extent (the
 * min_overlap), so an object no larger than that overlap is always fully
 * visible in some tile. Axis tile counts are minimized independently.
 * Throws when the total tile count would exceed @p max_tiles.
 */
inline TilePlan plan_tiles(std::string image_id, ImageDims dims, int tile_size,
                           double mean_extent, int input_resolution, int max_tiles = 1024) {
  if (input_resolution < 1) throw validation_error("input_resolution must be >= 1");
  if (tile_size < input_resolution)
    throw validation_error("tile_size " + std::to_string(tile_size) +
                           " below input resolution " + std::to_string(input_resolution) +
                           " (image '" + image_id + "' smaller than the network input?)");
  if (tile_size > std::min(dims.width, dims.height))
    throw validation_error("tile_size " + std::to_string(tile_size) + " exceeds image " +
                           std::to_string(dims.width) + "x" + std::to_string(dims.height));
  if (mean_extent < 0.0 || !std::isfinite(mean_extent))
    throw validation_error("mean_extent must be finite and >= 0");
  if (max_tiles < 1) throw validation_error("max_tiles must be >= 1");

  const double min_overlap = 1.5 * mean_extent;
  const auto xs = detail::plan_axis(dims.width, tile_size, min_overlap, max_tiles);
  const auto ys = detail::plan_axis(dims.height, tile_size, min_overlap, max_tiles);
  if (xs.size() * ys.size() > static_cast<std::size_t>(max_tiles))
    throw validation_error("degenerate overlap demand: plan needs " +
                           std::to_string(xs.size() * ys.size()) + " tiles, cap is " +
                           std::to_string(max_tiles));

  TilePlan plan;
  plan.image_id = std::move(image_id);
  plan.dims = dims;
  plan.tile_size = tile_size;
  plan.grid_x = static_cast<int>(xs.size());
  plan.grid_y = static_cast<int>(ys.size());
  plan.input_resolution = input_resolution;
  plan.min_overlap = min_overlap;
  plan.tiles.reserve(xs.size() * ys.size());
  for (int row = 0; row < plan.grid_y; ++row) {
    for (int col = 0; col < plan.grid_x; ++col) {
      const double x = xs[static_cast<std::size_t>(col)];
      const double y = ys[static_cast<std::size_t>(row)];
      plan.tiles.push_back({col, row, BBox(x, y, x + tile_size, y + tile_size)});
    }
  }
  return plan;
}

/// Affine map from network-input coordinates of one tile to image coordinates:
/// scale by tile_size/input_resolution, then translate by the tile offset.
inline BBox tile_to_global(const TilePlan& plan, int col, int row, const BBox& b) {
  const Tile& t = plan.tile_at(col, row);
  const double s = static_cast<double>(plan.tile_size) / plan.input_resolution;
  return BBox(t.rect.x_min + s * b.x_min, t.rect.y_min + s * b.y_min,
              t.rect.x_min + s * b.x_max, t.rect.y_min + s * b.y_max);
}

/// Exact inverse of tile_to_global.
inline BBox global_to_tile(const TilePlan& plan, int col, int row, const BBox& b) {
  const Tile& t = plan.tile_at(col, row);
  const double s = static_cast<double>(plan.tile_size) / plan.input_resolution;
  return BBox((b.x_min - t.rect.x_min) / s, (b.y_min - t.rect.y_min) / s,
              (b.x_max - t.rect.x_min) / s, (b.y_max - t.rect.y_min) / s);
}

}  // namespace tilekit

// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "tilekit/detector.hpp"
#include "tilekit/errors.hpp"
#include "tilekit/geometry.hpp"
#include "tilekit/tiling.hpp"

namespace tilekit {

enum class MatchStrategy { iou, one_way_ratio };
enum class ReducePolicy { largest_box, max_confidence };

/**
 * @brief Cross-tile duplicate fusion settings.
 *
 * iou pairs detections symmetrically; one_way_ratio pairs them when either
 * box's intersection ratio clears the threshold, which keeps working when a
 * tile-clipped partial view meets the full view of the same object.
 * Sensible defaults differ per strategy (0.25 for iou, 0.8 for one-way).
 */
struct FusionConfig {
  MatchStrategy strategy = MatchStrategy::one_way_ratio;
  double threshold = 0.8;
  ReducePolicy reduce_policy = ReducePolicy::largest_box;

  void validate() const {
    if (threshold <= 0.0 || threshold > 1.0)
      throw validation_error("fusion: threshold must be in (0, 1]");
  }
};

inline double default_threshold(MatchStrategy s) {
  return s == MatchStrategy::iou ? 0.25 : 0.8;
}

/// Connected group of detections matched as one object.
struct Cluster {
  std::vector<Detection> members;
};

namespace detail {

/// source_tile sort key; detections without one sort first.
inline std::pair<int, int> tile_key(const Detection& d) {
  return d.source_tile.value_or(std::make_pair(-1, -1));
}

inline auto canonical_key(const Detection& d) {
  return std::make_tuple(d.class_id, d.box.y_min, d.box.x_min, d.box.y_max, d.box.x_max,
                         -d.confidence, tile_key(d));
}

/// Canonical detection order: class, then box position, then confidence.
inline bool canonical_less(const Detection& a, const Detection& b) {
  return canonical_key(a) < canonical_key(b);
}

inline void canonical_sort(std::vector<Detection>& dets) {
  std::sort(dets.begin(), dets.end(), canonical_less);
}

inline bool pair_matches(const Detection& a, const Detection& b, const FusionConfig& cfg) {
  if (a.class_id != b.class_id) return false;
  if (cfg.strategy == MatchStrategy::iou) return iou(a.box, b.box) >= cfg.threshold;
  const double inter = intersection_area(a.box, b.box);
  const double aa = a.box.area(), ab = b.box.area();
  // Zero-area boxes have no defined ratio and never match.
  const double ra = aa > 0.0 ? inter / aa : 0.0;
  const double rb = ab > 0.0 ? inter / ab : 0.0;
  return std::max(ra, rb) >= cfg.threshold;
}

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace detail

/**
 * @brief Expand active grid cells into grid-cell-sized boxes in image
 *        coordinates.
 *
 * Every cell whose score reaches score_threshold becomes one detection:
 * its 8x8 input-pixel square mapped through the tile transform, confidence
 * equal to the cell score. Adjacent cells produce abutting, non-overlapping
 * boxes (the grid partitions the tile).
 */
inline std::vector<Detection> pseudo_boxes(const GridPrediction& gp, const TilePlan& plan,
                                           int col, int row, double score_threshold) {
  if (gp.grid_n * 8 != plan.input_resolution)
    throw validation_error("grid size " + std::to_string(gp.grid_n) +
                           " does not match input resolution " +
                           std::to_string(plan.input_resolution) + " (factor 8)");
  std::vector<Detection> out;
  for (int r = 0; r < gp.grid_n; ++r) {
    for (int c = 0; c < gp.grid_n; ++c) {
      for (int ch = 0; ch < gp.num_classes; ++ch) {
        const double s = gp.at(r, c, ch);
        if (s < score_threshold) continue;
        const BBox cell(c * 8.0, r * 8.0, (c + 1) * 8.0, (r + 1) * 8.0);
        out.push_back({ch + 1, tile_to_global(plan, col, row, cell), s,
                       std::make_pair(col, row)});
      }
    }
  }
  return out;
}

/**
 * @brief Baseline centroid-detector fusion: join predictions on neighboring
 *        grid cells (8-connectivity) into one box.
 *
 * Intended for pseudo-boxes of a single grid; adjacency is detected
 * geometrically (boxes that touch or overlap, with a quarter-cell
 * tolerance). Each connected component becomes one detection covering the
 * union of its members, confidence the maximum. This is the fusion rule
 * that merges abutting objects together, kept as the ablation baseline.
 */
inline std::vector<Detection> adjacency_fuse(const std::vector<Detection>& dets) {
  if (dets.empty()) return {};
  std::vector<Detection> sorted = dets;
  detail::canonical_sort(sorted);

  double cell = sorted[0].box.width();
  for (const auto& d : sorted) cell = std::min({cell, d.box.width(), d.box.height()});
  const double tol = 0.25 * std::max(cell, 1e-9);

  const int n = static_cast<int>(sorted.size());
  detail::UnionFind uf(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const BBox& a = sorted[static_cast<std::size_t>(i)].box;
      const BBox& b = sorted[static_cast<std::size_t>(j)].box;
      if (sorted[static_cast<std::size_t>(i)].class_id !=
          sorted[static_cast<std::size_t>(j)].class_id)
        continue;
      const bool touch_x = (b.x_min - a.x_max) <= tol && (a.x_min - b.x_max) <= tol;
      const bool touch_y = (b.y_min - a.y_max) <= tol && (a.y_min - b.y_max) <= tol;
      if (touch_x && touch_y) uf.unite(i, j);
    }
  }

  std::map<int, Detection> merged;  // root -> accumulated detection
  for (int i = 0; i < n; ++i) {
    const Detection& d = sorted[static_cast<std::size_t>(i)];
    auto [it, fresh] = merged.emplace(uf.find(i), d);
    if (!fresh) {
      Detection& m = it->second;
      m.box = BBox(std::min(m.box.x_min, d.box.x_min), std::min(m.box.y_min, d.box.y_min),
                   std::max(m.box.x_max, d.box.x_max), std::max(m.box.y_max, d.box.y_max));
      m.confidence = std::max(m.confidence, d.confidence);
    }
  }

  std::vector<Detection> out;
  out.reserve(merged.size());
  for (auto& [root, d] : merged) out.push_back(std::move(d));
  detail::canonical_sort(out);
  return out;
}

/**
 * @brief All matching index pairs among detections of one image, emitted in
 *        canonical (i < j) lexicographic order. Matching is class-local.
 */
inline std::vector<std::pair<int, int>> match_pairs(const std::vector<Detection>& dets,
                                                    const FusionConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<int, int>> pairs;
  const int n = static_cast<int>(dets.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (detail::pair_matches(dets[static_cast<std::size_t>(i)],
                               dets[static_cast<std::size_t>(j)], cfg))
        pairs.emplace_back(i, j);
  return pairs;
}

/**
 * @brief Same result as match_pairs via a uniform-grid spatial index.
 *
 * Any matching pair must intersect (threshold > 0), so only boxes sharing an
 * index cell are compared. Cell size is the largest box side, which bounds
 * each box to at most 4 cells. Output is identical to the naive path.
 */
inline std::vector<std::pair<int, int>> match_pairs_indexed(const std::vector<Detection>& dets,
                                                            const FusionConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(dets.size());
  if (n < 2) return {};

  double cell = 1.0;
  for (const auto& d : dets) cell = std::max({cell, d.box.width(), d.box.height()});

  std::map<std::pair<long, long>, std::vector<int>> buckets;
  const auto cell_of = [cell](double v) { return static_cast<long>(std::floor(v / cell)); };
  for (int i = 0; i < n; ++i) {
    const BBox& b = dets[static_cast<std::size_t>(i)].box;
    const long cx0 = cell_of(b.x_min), cx1 = cell_of(b.x_max);
    const long cy0 = cell_of(b.y_min), cy1 = cell_of(b.y_max);
    for (long cy = cy0; cy <= cy1; ++cy)
      for (long cx = cx0; cx <= cx1; ++cx) buckets[{cx, cy}].push_back(i);
  }

  std::set<std::pair<int, int>> pairs;
  for (const auto& [key, ids] : buckets) {
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        int i = ids[a], j = ids[b];
        if (i > j) std::swap(i, j);
        if (pairs.count({i, j})) continue;
        if (detail::pair_matches(dets[static_cast<std::size_t>(i)],
                                 dets[static_cast<std::size_t>(j)], cfg))
          pairs.insert({i, j});
      }
    }
  }
  return {pairs.begin(), pairs.end()};
}

/**
 * @brief Connected components of the match relation (transitive closure).
 *
 * Singletons are clusters of size 1. Components are ordered by their
 * smallest member index; members are ascending.
 */
inline std::vector<std::vector<int>> cluster(std::size_t n,
                                             const std::vector<std::pair<int, int>>& pairs) {
  detail::UnionFind uf(n);
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n)
      throw validation_error("cluster: pair index out of range");
    uf.unite(i, j);
  }
  std::map<int, std::vector<int>> comps;
  for (std::size_t i = 0; i < n; ++i)
    comps[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));
  std::vector<std::vector<int>> out;
  out.reserve(comps.size());
  for (auto& [root, members] : comps) out.push_back(std::move(members));
  return out;
}

/**
 * @brief Collapse one cluster to a single detection.
 *
 * largest_box keeps the member with maximal area (the unclipped view of the
 * object); max_confidence keeps the most confident one. Ties break by
 * (y_min, x_min, source_tile). The survivor's confidence is raised to the
 * cluster maximum.
 */
inline Detection reduce(const std::vector<Detection>& members, ReducePolicy policy) {
  if (members.empty()) throw validation_error("reduce: empty cluster");
  const auto tie_key = [](const Detection& d) {
    return std::make_tuple(d.box.y_min, d.box.x_min, detail::tile_key(d));
  };
  std::size_t best = 0;
  double max_conf = members[0].confidence;
  for (std::size_t i = 1; i < members.size(); ++i) {
    max_conf = std::max(max_conf, members[i].confidence);
    const Detection& cand = members[i];
    const Detection& cur = members[best];
    bool better;
    if (policy == ReducePolicy::largest_box) {
      better = cand.box.area() > cur.box.area() ||
               (cand.box.area() == cur.box.area() && tie_key(cand) < tie_key(cur));
    } else {
      better = cand.confidence > cur.confidence ||
               (cand.confidence == cur.confidence && tie_key(cand) < tie_key(cur));
    }
    if (better) best = i;
  }
  Detection out = members[best];
  out.confidence = max_conf;
  return out;
}

/**
 * @brief Full per-image fusion: match, cluster, reduce, per class.
 *
 * Input order does not matter (detections are canonicalized first) and the
 * output is canonically sorted, so fusing is idempotent and byte-stable.
 */
inline std::vector<Detection> fuse(std::vector<Detection> dets, const FusionConfig& cfg) {
  cfg.validate();
  detail::canonical_sort(dets);
  // The indexed path prunes by geometry only; results are identical to the
  // naive scan, so large inputs take the fast route.
  const auto pairs =
      dets.size() >= 128 ? match_pairs_indexed(dets, cfg) : match_pairs(dets, cfg);
  const auto comps = cluster(dets.size(), pairs);
  std::vector<Detection> out;
  out.reserve(comps.size());
  for (const auto& comp : comps) {
    std::vector<Detection> members;
    members.reserve(comp.size());
    for (int idx : comp) members.push_back(dets[static_cast<std::size_t>(idx)]);
    out.push_back(reduce(members, cfg.reduce_policy));
  }
  detail::canonical_sort(out);
  return out;
}

}  // namespace tilekit

// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "tilekit/errors.hpp"

namespace tilekit {

/**
 * @brief Axis-aligned box in continuous pixel coordinates.
 *
 * Image frame, origin top-left, x right, y down. Zero-area boxes are
 * permitted; negative extents and non-finite coordinates are rejected at
 * construction. Area is the plain (max-min) product, no +1 pixel
 * convention.
 */
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  BBox() = default;

  BBox(double x0, double y0, double x1, double y1)
      : x_min(x0), y_min(y0), x_max(x1), y_max(y1) {
    if (!(std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) && std::isfinite(y1)))
      throw validation_error("BBox: coordinates must be finite");
    if (x1 < x0 || y1 < y0)
      throw validation_error("BBox: negative extent (x_min<=x_max, y_min<=y_max required)");
  }

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  /// Inclusive containment of a point (boundary counts).
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }

  bool operator==(const BBox& o) const {
    return x_min == o.x_min && y_min == o.y_min && x_max == o.x_max && y_max == o.y_max;
  }
};

/// Positive integer image dimensions.
struct ImageDims {
  int width = 1;
  int height = 1;

  ImageDims() = default;
  ImageDims(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) throw validation_error("ImageDims: width and height must be >= 1");
  }

  double area() const { return static_cast<double>(width) * static_cast<double>(height); }
};

/// Normalized bounding-box area: box area divided by image area, in (0, 1].
struct Nba {
  double value = 1.0;

  Nba() = default;
  explicit Nba(double v) : value(v) {
    if (!(std::isfinite(v) && v > 0.0 && v <= 1.0))
      throw validation_error("Nba: value must be in (0, 1]");
  }
};

inline double area(const BBox& b) { return b.area(); }

inline double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

/// Intersection over union. Defined as 0 when the union has zero area.
inline double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

/**
 * @brief Directional overlap: intersection area divided by the first box's
 *        own area.
 *
 * Equals 1 exactly when a is contained in b, 0 when disjoint. Unlike IoU
 * this is not symmetric; the first argument owns the denominator.
 * Throws if the first box has zero area (ratio undefined).
 */
inline double intersection_ratio(const BBox& a, const BBox& b) {
  const double denom = a.area();
  if (denom <= 0.0)
    throw validation_error("intersection_ratio: first box has zero area");
  return intersection_area(a, b) / denom;
}

/// Intersection rectangle of b and r, or nullopt when they do not overlap.
/// A degenerate (zero-area) intersection is still a value, not "empty".
inline std::optional<BBox> clip(const BBox& b, const BBox& r) {
  const double x0 = std::max(b.x_min, r.x_min);
  const double y0 = std::max(b.y_min, r.y_min);
  const double x1 = std::min(b.x_max, r.x_max);
  const double y1 = std::min(b.y_max, r.y_max);
  if (x1 < x0 || y1 < y0) return std::nullopt;
  return BBox(x0, y0, x1, y1);
}

}  // namespace tilekit

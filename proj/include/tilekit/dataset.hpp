// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tilekit/errors.hpp"
#include "tilekit/geometry.hpp"
#include "tilekit/rng.hpp"

namespace tilekit {

struct LabeledBox {
  BBox box;
  int class_id = 1;
};

/// Ground truth for one image.
struct ImageAnnotations {
  std::string image_id;
  ImageDims dims;
  std::vector<LabeledBox> boxes;
};

struct ParseOptions {
  /// Reorder swapped corners (x1>x2 or y1>y2) instead of rejecting them.
  bool swap_corners = false;
};

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
  std::size_t pos = 0;
  try {
    out = std::stod(tok, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == tok.size() && std::isfinite(out);
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

/**
 * @brief Parse annotation text: one object per line, `x1 y1 x2 y2 [class]`,
 *        whitespace separated, class defaults to 1, blank lines ignored.
 *
 * Errors carry the 1-based line number. Inverted corners are an error
 * unless ParseOptions::swap_corners is set.
 */
inline std::vector<LabeledBox> parse_annotation_file(std::string_view text,
                                                     const ParseOptions& opts = {}) {
  std::vector<LabeledBox> out;
  std::istringstream is{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto toks = detail::split_ws(line);
    if (toks.size() != 4 && toks.size() != 5)
      throw validation_error("line " + std::to_string(line_no) + ": expected 4 or 5 fields, got " +
                             std::to_string(toks.size()));
    double v[4];
    for (int i = 0; i < 4; ++i) {
      if (!detail::parse_double(toks[static_cast<std::size_t>(i)], v[i]))
        throw validation_error("line " + std::to_string(line_no) + ": non-numeric field '" +
                               toks[static_cast<std::size_t>(i)] + "'");
    }
    int class_id = 1;
    if (toks.size() == 5) {
      double c;
      if (!detail::parse_double(toks[4], c) || c != std::floor(c))
        throw validation_error("line " + std::to_string(line_no) + ": class field '" + toks[4] +
                               "' is not an integer");
      class_id = static_cast<int>(c);
      if (class_id < 1)
        throw validation_error("line " + std::to_string(line_no) + ": class id must be >= 1");
    }
    if (v[0] > v[2] || v[1] > v[3]) {
      if (!opts.swap_corners)
        throw validation_error("line " + std::to_string(line_no) +
                               ": inverted box corners (enable corner swap to accept)");
      if (v[0] > v[2]) std::swap(v[0], v[2]);
      if (v[1] > v[3]) std::swap(v[1], v[3]);
    }
    out.push_back({BBox(v[0], v[1], v[2], v[3]), class_id});
  }
  return out;
}

struct LoadOptions {
  /// Used when the dataset ships no per-image dimension index.
  ImageDims default_dims{1280, 720};
  bool swap_corners = false;
};

namespace detail {

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw io_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Clamp a box into [0,w]x[0,h].
inline BBox clamp_to_image(const BBox& b, ImageDims dims) {
  const double w = dims.width, h = dims.height;
  return BBox(std::clamp(b.x_min, 0.0, w), std::clamp(b.y_min, 0.0, h),
              std::clamp(b.x_max, 0.0, w), std::clamp(b.y_max, 0.0, h));
}

}  // namespace detail

/**
 * @brief Load a dataset split from an annotation-per-file tree.
 *
 * Expected layout under @p root:
 *   ImageSets/<split>.txt   image ids, one per line
 *   Annotations/<id>.txt    per-image annotation text (grammar above)
 *   image_dims.json         optional {"id": [width, height], ...} sidecar
 */
inline std::vector<ImageAnnotations> load_dataset(const std::filesystem::path& root,
                                                  const std::string& split,
                                                  const LoadOptions& opts = {}) {
  namespace fs = std::filesystem;
  const fs::path split_file = root / "ImageSets" / (split + ".txt");
  if (!fs::exists(split_file)) throw io_error("split file not found: " + split_file.string());

  std::map<std::string, ImageDims> dims_index;
  const fs::path dims_file = root / "image_dims.json";
  if (fs::exists(dims_file)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(detail::read_text_file(dims_file));
    } catch (const nlohmann::json::exception& e) {
      throw validation_error(dims_file.string() + ": " + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it)
      dims_index.emplace(it.key(), ImageDims(it.value().at(0).get<int>(),
                                             it.value().at(1).get<int>()));
  }

  std::vector<ImageAnnotations> out;
  std::set<std::string> seen;
  std::istringstream ids(detail::read_text_file(split_file));
  std::string id;
  while (std::getline(ids, id)) {
    id = detail::trim(id);
    if (id.empty()) continue;
    if (!seen.insert(id).second)
      throw validation_error("duplicate image id '" + id + "' in split " + split);
    const fs::path ann = root / "Annotations" / (id + ".txt");
    if (!fs::exists(ann))
      throw io_error("annotation file missing for image id '" + id + "': " + ann.string());

    ImageAnnotations rec;
    rec.image_id = id;
    const auto dit = dims_index.find(id);
    rec.dims = dit != dims_index.end() ? dit->second : opts.default_dims;
    ParseOptions popts;
    popts.swap_corners = opts.swap_corners;
    std::vector<LabeledBox> boxes;
    try {
      boxes = parse_annotation_file(detail::read_text_file(ann), popts);
    } catch (const validation_error& e) {
      throw validation_error(ann.string() + ": " + e.what());
    }
    for (auto& lb : boxes) rec.boxes.push_back({detail::clamp_to_image(lb.box, rec.dims), lb.class_id});
    out.push_back(std::move(rec));
  }
  return out;
}

/// Synthetic scene generator configuration. Deterministic per seed.
struct SynthConfig {
  ImageDims dims{1280, 720};
  int num_images = 1;
  int min_count = 0;
  int max_count = 0;
  double min_extent = 20.0;
  double max_extent = 40.0;
  /// Minimum axis-gap between any two boxes; 0 allows abutting objects.
  double min_spacing = 0.0;
  std::uint64_t seed = 0;
  enum class Layout { scatter, rows } layout = Layout::scatter;
  std::string id_prefix = "synth";
};

namespace detail {

/// Separation between two boxes: the larger of the axis gaps. Negative when
/// the boxes overlap in both axes; 0 when they abut.
inline double box_separation(const BBox& a, const BBox& b) {
  const double gx = std::max(b.x_min - a.x_max, a.x_min - b.x_max);
  const double gy = std::max(b.y_min - a.y_max, a.y_min - b.y_max);
  return std::max(gx, gy);
}

}  // namespace detail

/**
 * @brief Generate synthetic annotations: random disjoint boxes (scatter) or
 *        packed parking-lot rows (rows).
 *
 * Rejection sampling enforces the spacing floor; generation is keyed by
 * (seed, image index) so output is byte-stable for a given config.
 */
inline std::vector<ImageAnnotations> synth_generate(const SynthConfig& cfg) {
  if (cfg.num_images < 0) throw validation_error("synth: num_images must be >= 0");
  if (cfg.min_count < 0 || cfg.max_count < cfg.min_count)
    throw validation_error("synth: invalid object count range");
  if (cfg.min_extent <= 0.0 || cfg.max_extent < cfg.min_extent)
    throw validation_error("synth: extents must be positive, min <= max");
  if (cfg.min_spacing < 0.0) throw validation_error("synth: min_spacing must be >= 0");
  if (cfg.max_extent > std::min(cfg.dims.width, cfg.dims.height))
    throw validation_error("synth: max_extent exceeds image dimensions");

  std::vector<ImageAnnotations> out;
  out.reserve(static_cast<std::size_t>(cfg.num_images));
  for (int img = 0; img < cfg.num_images; ++img) {
    Rng rng = Rng::keyed(cfg.seed, "synth", img);
    ImageAnnotations rec;
    {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "_%05d", img);
      rec.image_id = cfg.id_prefix + buf;
    }
    rec.dims = cfg.dims;
    const int count = static_cast<int>(rng.uniform_int(cfg.min_count, cfg.max_count));

    if (cfg.layout == SynthConfig::Layout::rows) {
      // Parking-lot pattern: rows of boxes separated by exactly min_spacing
      // (abutting when 0).
      const double margin = 2.0;
      double x = margin, y = margin, row_h = 0.0;
      for (int k = 0; k < count; ++k) {
        const double w = rng.uniform(cfg.min_extent, cfg.max_extent);
        const double h = rng.uniform(cfg.min_extent, cfg.max_extent);
        if (x + w > cfg.dims.width - margin) {
          x = margin;
          y += row_h + std::max(cfg.min_spacing, 1.0);
          row_h = 0.0;
        }
        if (y + h > cfg.dims.height - margin)
          throw validation_error("synth: rows layout cannot place " + std::to_string(count) +
                                 " objects in " + std::to_string(cfg.dims.width) + "x" +
                                 std::to_string(cfg.dims.height));
        rec.boxes.push_back({BBox(x, y, x + w, y + h), 1});
        x += w + cfg.min_spacing;
        row_h = std::max(row_h, h);
      }
    } else {
      const long max_attempts = 200L * std::max(count, 1) + 200L;
      long attempts = 0;
      while (static_cast<int>(rec.boxes.size()) < count) {
        if (++attempts > max_attempts)
          throw validation_error("synth: could not place " + std::to_string(count) +
                                 " objects with spacing " + std::to_string(cfg.min_spacing) +
                                 " after " + std::to_string(max_attempts) + " attempts");
        const double w = rng.uniform(cfg.min_extent, cfg.max_extent);
        const double h = rng.uniform(cfg.min_extent, cfg.max_extent);
        const double x = rng.uniform(0.0, cfg.dims.width - w);
        const double y = rng.uniform(0.0, cfg.dims.height - h);
        const BBox cand(x, y, x + w, y + h);
        bool ok = true;
        for (const auto& lb : rec.boxes) {
          if (detail::box_separation(cand, lb.box) < cfg.min_spacing) {
            ok = false;
            break;
          }
        }
        if (ok) rec.boxes.push_back({cand, 1});
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

/// Serialize annotations to the canonical dataset JSON document.
inline nlohmann::ordered_json dataset_to_json(const std::vector<ImageAnnotations>& images) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& rec : images) {
    nlohmann::ordered_json boxes = nlohmann::ordered_json::array();
    for (const auto& lb : rec.boxes) {
      boxes.push_back({{"x_min", lb.box.x_min},
                       {"y_min", lb.box.y_min},
                       {"x_max", lb.box.x_max},
                       {"y_max", lb.box.y_max},
                       {"class_id", lb.class_id}});
    }
    arr.push_back({{"image_id", rec.image_id},
                   {"width", rec.dims.width},
                   {"height", rec.dims.height},
                   {"boxes", std::move(boxes)}});
  }
  return arr;
}

inline std::vector<ImageAnnotations> dataset_from_json(const nlohmann::json& arr) {
  std::vector<ImageAnnotations> out;
  std::set<std::string> seen;
  for (const auto& rec : arr) {
    ImageAnnotations a;
    a.image_id = rec.at("image_id").get<std::string>();
    if (!seen.insert(a.image_id).second)
      throw validation_error("duplicate image id '" + a.image_id + "' in dataset");
    a.dims = ImageDims(rec.at("width").get<int>(), rec.at("height").get<int>());
    for (const auto& jb : rec.at("boxes")) {
      const int cls = jb.at("class_id").get<int>();
      if (cls < 1) throw validation_error("class id must be >= 1 (image '" + a.image_id + "')");
      a.boxes.push_back({BBox(jb.at("x_min").get<double>(), jb.at("y_min").get<double>(),
                              jb.at("x_max").get<double>(), jb.at("y_max").get<double>()),
                         cls});
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace tilekit

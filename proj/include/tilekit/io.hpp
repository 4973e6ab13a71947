// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tilekit/cost.hpp"
#include "tilekit/dataset.hpp"
#include "tilekit/detector.hpp"
#include "tilekit/errors.hpp"
#include "tilekit/metrics.hpp"
#include "tilekit/tiling.hpp"

namespace tilekit {

constexpr int kFormatVersion = 1;

using ojson = nlohmann::ordered_json;

namespace detail {

inline std::string read_file(const std::filesystem::path& p) { return read_text_file(p); }

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw io_error("cannot write " + p.string());
  f << content;
  if (!f) throw io_error("failed writing " + p.string());
}

inline nlohmann::json parse_json(const std::string& text, const std::string& where) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(where + ": " + e.what());
  }
}

/// Standard document envelope: format version first, config echo second.
inline ojson envelope(const ojson& config_echo) {
  ojson doc;
  doc["format_version"] = kFormatVersion;
  doc["config"] = config_echo.is_null() ? ojson::object() : config_echo;
  return doc;
}

inline void check_version(const nlohmann::json& doc, const std::string& where) {
  if (!doc.contains("format_version")) return;  // headerless inputs are accepted
  const int v = doc.at("format_version").get<int>();
  if (v != kFormatVersion)
    throw validation_error(where + ": unsupported format_version " + std::to_string(v));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset documents

inline void save_dataset_file(const std::filesystem::path& path,
                              const std::vector<ImageAnnotations>& images,
                              const ojson& config_echo = {}) {
  ojson doc = detail::envelope(config_echo);
  doc["images"] = dataset_to_json(images);
  detail::write_file(path, doc.dump(2) + "\n");
}

inline std::vector<ImageAnnotations> load_dataset_file(const std::filesystem::path& path) {
  const auto doc = detail::parse_json(detail::read_file(path), path.string());
  detail::check_version(doc, path.string());
  try {
    return dataset_from_json(doc.at("images"));
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Tile manifests

/// Serialize plans with the canonical field order and row-major tile order
/// the golden tests freeze.
inline void save_manifest(const std::filesystem::path& path, const std::vector<TilePlan>& plans,
                          const ojson& config_echo = {}) {
  ojson doc = detail::envelope(config_echo);
  ojson images = ojson::array();
  for (const auto& plan : plans) {
    ojson tiles = ojson::array();
    for (const auto& t : plan.tiles) {
      tiles.push_back({{"col", t.col},
                       {"row", t.row},
                       {"x", static_cast<int>(t.rect.x_min)},
                       {"y", static_cast<int>(t.rect.y_min)}});
    }
    images.push_back({{"image_id", plan.image_id},
                      {"width", plan.dims.width},
                      {"height", plan.dims.height},
                      {"tile_size", plan.tile_size},
                      {"input_resolution", plan.input_resolution},
                      {"grid", {plan.grid_x, plan.grid_y}},
                      {"tiles", std::move(tiles)}});
  }
  doc["images"] = std::move(images);
  detail::write_file(path, doc.dump(2) + "\n");
}

inline std::vector<TilePlan> load_manifest(const std::filesystem::path& path) {
  const auto doc = detail::parse_json(detail::read_file(path), path.string());
  detail::check_version(doc, path.string());
  std::vector<TilePlan> plans;
  for (const auto& rec : doc.at("images")) {
    TilePlan plan;
    plan.image_id = rec.at("image_id").get<std::string>();
    plan.dims = ImageDims(rec.at("width").get<int>(), rec.at("height").get<int>());
    plan.tile_size = rec.at("tile_size").get<int>();
    plan.input_resolution = rec.at("input_resolution").get<int>();
    plan.grid_x = rec.at("grid").at(0).get<int>();
    plan.grid_y = rec.at("grid").at(1).get<int>();
    if (plan.tile_size < 1 || plan.input_resolution < 1 || plan.grid_x < 1 || plan.grid_y < 1)
      throw validation_error(path.string() + ": invalid plan for image '" + plan.image_id + "'");
    const auto& jt = rec.at("tiles");
    if (static_cast<int>(jt.size()) != plan.grid_x * plan.grid_y)
      throw validation_error(path.string() + ": tile count does not match grid for image '" +
                             plan.image_id + "'");
    int k = 0;
    for (const auto& t : jt) {
      const int col = t.at("col").get<int>();
      const int row = t.at("row").get<int>();
      if (col != k % plan.grid_x || row != k / plan.grid_x)
        throw validation_error(path.string() + ": tiles not in row-major order for image '" +
                               plan.image_id + "'");
      const double x = t.at("x").get<double>();
      const double y = t.at("y").get<double>();
      plan.tiles.push_back({col, row, BBox(x, y, x + plan.tile_size, y + plan.tile_size)});
      ++k;
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

// ---------------------------------------------------------------------------
// Prediction records (JSON lines)

/// Per-tile detections of one image, keyed (col, row).
using TileDetections = std::map<std::pair<int, int>, std::vector<Detection>>;

/**
 * @brief Write per-tile predictions as JSON lines.
 *
 * First line is a header record carrying the format version and config
 * echo; every following line is one detection with its box in
 * network-input coordinates. The same format feeds `fuse`, so external
 * detectors plug in by emitting it.
 */
inline void save_predictions(const std::filesystem::path& path,
                             const std::map<std::string, TileDetections>& by_image,
                             const ojson& config_echo = {}) {
  std::ostringstream out;
  ojson header = detail::envelope(config_echo);
  header["type"] = "predictions";
  out << header.dump() << "\n";
  for (const auto& [image_id, tiles] : by_image) {
    for (const auto& [tile, dets] : tiles) {
      for (const auto& d : dets) {
        ojson rec;
        rec["image_id"] = image_id;
        rec["tile"] = {tile.first, tile.second};
        rec["class_id"] = d.class_id;
        rec["box"] = {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max};
        rec["confidence"] = d.confidence;
        out << rec.dump() << "\n";
      }
    }
  }
  detail::write_file(path, out.str());
}

/**
 * @brief Load a predictions file and validate every record against the tile
 *        manifest.
 *
 * Unknown image ids, out-of-grid tile indices, coordinates outside the
 * network input square, and malformed records are all reported with their
 * line number. The header line is optional on input.
 */
inline std::map<std::string, TileDetections> load_external(
    const std::filesystem::path& path, const std::vector<TilePlan>& plans) {
  std::map<std::string, const TilePlan*> by_id;
  for (const auto& p : plans) by_id.emplace(p.image_id, &p);

  std::map<std::string, TileDetections> out;
  std::istringstream is(detail::read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (detail::trim(line).empty()) continue;
    const auto rec = detail::parse_json(line, where);
    if (rec.contains("format_version") && !rec.contains("image_id")) {
      detail::check_version(rec, where);
      continue;  // header record
    }
    try {
      const std::string image_id = rec.at("image_id").get<std::string>();
      const auto it = by_id.find(image_id);
      if (it == by_id.end())
        throw validation_error(where + ": unknown image id '" + image_id + "'");
      const TilePlan& plan = *it->second;
      const int col = rec.at("tile").at(0).get<int>();
      const int row = rec.at("tile").at(1).get<int>();
      if (col < 0 || col >= plan.grid_x || row < 0 || row >= plan.grid_y)
        throw validation_error(where + ": tile (" + std::to_string(col) + "," +
                               std::to_string(row) + ") outside the " +
                               std::to_string(plan.grid_x) + "x" + std::to_string(plan.grid_y) +
                               " grid of image '" + image_id + "'");
      const auto& jb = rec.at("box");
      const BBox box(jb.at(0).get<double>(), jb.at(1).get<double>(), jb.at(2).get<double>(),
                     jb.at(3).get<double>());
      const double r = plan.input_resolution;
      if (box.x_min < 0.0 || box.y_min < 0.0 || box.x_max > r || box.y_max > r)
        throw validation_error(where + ": box outside the network input square [0, " +
                               std::to_string(plan.input_resolution) + "]");
      const double conf = rec.at("confidence").get<double>();
      if (conf < 0.0 || conf > 1.0)
        throw validation_error(where + ": confidence outside [0, 1]");
      const int cls = rec.at("class_id").get<int>();
      if (cls < 1) throw validation_error(where + ": class id must be >= 1");
      out[image_id][{col, row}].push_back(
          {cls, box, conf, std::make_pair(col, row)});
    } catch (const nlohmann::json::exception& e) {
      throw validation_error(where + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fused detections (JSON lines, global coordinates, no tile field)

inline void save_fused(const std::filesystem::path& path,
                       const std::map<std::string, std::vector<Detection>>& by_image,
                       const ojson& config_echo = {}) {
  std::ostringstream out;
  ojson header = detail::envelope(config_echo);
  header["type"] = "fused";
  out << header.dump() << "\n";
  for (const auto& [image_id, dets] : by_image) {
    for (const auto& d : dets) {
      ojson rec;
      rec["image_id"] = image_id;
      rec["class_id"] = d.class_id;
      rec["box"] = {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max};
      rec["confidence"] = d.confidence;
      out << rec.dump() << "\n";
    }
  }
  detail::write_file(path, out.str());
}

inline std::map<std::string, std::vector<Detection>> load_fused(
    const std::filesystem::path& path) {
  std::map<std::string, std::vector<Detection>> out;
  std::istringstream is(detail::read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (detail::trim(line).empty()) continue;
    const auto rec = detail::parse_json(line, where);
    if (rec.contains("format_version") && !rec.contains("image_id")) {
      detail::check_version(rec, where);
      continue;
    }
    try {
      const auto& jb = rec.at("box");
      out[rec.at("image_id").get<std::string>()].push_back(
          {rec.at("class_id").get<int>(),
           BBox(jb.at(0).get<double>(), jb.at(1).get<double>(), jb.at(2).get<double>(),
                jb.at(3).get<double>()),
           rec.at("confidence").get<double>(), std::nullopt});
    } catch (const nlohmann::json::exception& e) {
      throw validation_error(where + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation reports

inline ojson report_to_json(const EvalReport& rep, const ojson& config_echo = {}) {
  ojson doc = detail::envelope(config_echo);
  doc["aggregate"] = {{"true_positives", rep.tp},
                      {"false_positives", rep.fp},
                      {"false_negatives", rep.fn},
                      {"precision", rep.precision},
                      {"recall", rep.recall},
                      {"f1", rep.f1},
                      {"count_mae", rep.count_mae}};
  ojson per_image = ojson::array();
  for (const auto& ie : rep.per_image) {
    per_image.push_back({{"image_id", ie.image_id},
                         {"tp", ie.tp},
                         {"fp", ie.fp},
                         {"fn", ie.fn},
                         {"pred_count", ie.pred_count},
                         {"gt_count", ie.gt_count}});
  }
  doc["per_image"] = std::move(per_image);
  return doc;
}

inline void save_report(const std::filesystem::path& path, const EvalReport& rep,
                        const ojson& config_echo = {}) {
  detail::write_file(path, report_to_json(rep, config_echo).dump(2) + "\n");
}

/// Flat per-image table with the stable column order downstream tools key on.
inline void save_report_csv(const std::filesystem::path& path, const EvalReport& rep) {
  std::ostringstream out;
  out << "image_id,tp,fp,fn,pred_count,gt_count\n";
  for (const auto& ie : rep.per_image)
    out << ie.image_id << "," << ie.tp << "," << ie.fp << "," << ie.fn << "," << ie.pred_count
        << "," << ie.gt_count << "\n";
  detail::write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Device profiles

/// Profiles ship as a plain JSON list of records.
inline std::vector<DeviceProfile> load_profiles(const std::filesystem::path& path) {
  const auto doc = detail::parse_json(detail::read_file(path), path.string());
  if (!doc.is_array()) throw validation_error(path.string() + ": expected a JSON list");
  std::vector<DeviceProfile> out;
  for (const auto& rec : doc) {
    DeviceProfile p;
    try {
      p.name = rec.at("name").get<std::string>();
      p.network = rec.value("network", std::string());
      p.input_resolution = rec.value("input_resolution", 0);
      p.latency_per_tile = rec.at("latency_per_tile").get<double>();
      p.energy_per_tile = rec.value("energy_per_tile", 0.0);
      p.source = rec.value("source", std::string());
    } catch (const nlohmann::json::exception& e) {
      throw validation_error(path.string() + ": " + e.what());
    }
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

inline const DeviceProfile& find_profile(const std::vector<DeviceProfile>& profiles,
                                         const std::string& name) {
  for (const auto& p : profiles)
    if (p.name == name) return p;
  throw validation_error("no profile named '" + name + "'");
}

}  // namespace tilekit

// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end wiring the pipeline:
//   ingest -> plan -> (crop) -> simulate/external -> fuse -> eval -> sweep/cost
//
// Exit codes: 0 success, 1 validation error, 2 I/O error. Commands validate
// and compute fully before writing, so a validation failure leaves no
// partial outputs. Every output file embeds the effective configuration and
// a format version.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tilekit/tilekit.hpp"

namespace fs = std::filesystem;
using tilekit::ojson;

namespace {

// --------------------------------------------------------------------------
// Option helpers

/// Target NBA values arrive as "0.008" or "0.8%"; stored internally as a
/// fraction in (0, 1].
double parse_nba(std::string text) {
  text = tilekit::detail::trim(text);
  bool percent = false;
  if (!text.empty() && text.back() == '%') {
    percent = true;
    text.pop_back();
    text = tilekit::detail::trim(text);
  }
  double v;
  if (!tilekit::detail::parse_double(text, v))
    throw tilekit::validation_error("cannot parse NBA value '" + text + "'");
  if (percent) v /= 100.0;
  try {
    return tilekit::Nba(v).value;
  } catch (const tilekit::validation_error&) {
    throw tilekit::validation_error("NBA value '" + text + (percent ? "%" : "") +
                                    "' is outside (0, 1] as a fraction");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!tilekit::detail::trim(cur).empty()) out.push_back(tilekit::detail::trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!tilekit::detail::trim(cur).empty()) out.push_back(tilekit::detail::trim(cur));
  return out;
}

std::vector<double> parse_nba_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split_list(text)) out.push_back(parse_nba(tok));
  if (out.empty()) throw tilekit::validation_error("empty NBA list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split_list(text)) {
    double v;
    if (!tilekit::detail::parse_double(tok, v))
      throw tilekit::validation_error("cannot parse number '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw tilekit::validation_error("empty number list");
  return out;
}

/// Flag-over-file-over-default resolution. Keys are the long option names
/// with dashes replaced by underscores.
class FileConfig {
 public:
  void load(const std::string& path) {
    if (path.empty()) return;
    cfg_ = tilekit::detail::parse_json(tilekit::detail::read_file(path), path);
    if (!cfg_.is_object())
      throw tilekit::validation_error(path + ": config file must hold a JSON object");
  }

  template <typename T>
  void apply(const CLI::Option* opt, const char* key, T& value) const {
    if (!cfg_.is_object() || (opt && opt->count() > 0) || !cfg_.contains(key)) return;
    try {
      value = cfg_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw tilekit::validation_error(std::string("config key '") + key + "': " + e.what());
    }
  }

  /// String-typed options also accept bare JSON numbers ("0.008" == 0.008).
  void apply_str(const CLI::Option* opt, const char* key, std::string& value) const {
    if (!cfg_.is_object() || (opt && opt->count() > 0) || !cfg_.contains(key)) return;
    const auto& v = cfg_.at(key);
    value = v.is_string() ? v.get<std::string>() : v.dump();
  }

 private:
  nlohmann::json cfg_;
};

std::string config_path_or_env(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("TILEKIT_CONFIG");
  return env ? std::string(env) : std::string();
}

tilekit::MatchConfig make_match_config(const std::string& mode, double iou_threshold) {
  tilekit::MatchConfig mc;
  if (mode == "centroid") {
    mc.mode = tilekit::MatchMode::centroid_in_box;
  } else if (mode == "iou") {
    mc.mode = tilekit::MatchMode::iou_at;
  } else {
    throw tilekit::validation_error("unknown match mode '" + mode +
                                    "' (expected centroid or iou)");
  }
  if (iou_threshold <= 0.0 || iou_threshold > 1.0)
    throw tilekit::validation_error("match IoU threshold must be in (0, 1]");
  mc.iou_threshold = iou_threshold;
  return mc;
}

// --------------------------------------------------------------------------
// Subcommands. Each struct owns its option storage; run() loads inputs,
// computes, then writes.

struct IngestCmd {
  std::string config, root, split = "test", out;
  bool swap_corners = false;
  int default_width = 1280, default_height = 720;
  CLI::Option *o_root = nullptr, *o_split = nullptr, *o_out = nullptr, *o_swap = nullptr,
              *o_dw = nullptr, *o_dh = nullptr;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("ingest", "convert an annotation tree to the dataset JSON");
    c->add_option("--config", config, "JSON config file (or TILEKIT_CONFIG)");
    o_root = c->add_option("--root", root, "dataset root (ImageSets/, Annotations/)");
    o_split = c->add_option("--split", split, "split name, e.g. train or test");
    o_swap = c->add_flag("--swap-corners", swap_corners, "accept inverted box corners");
    o_dw = c->add_option("--default-width", default_width, "image width when no sidecar index");
    o_dh = c->add_option("--default-height", default_height, "image height fallback");
    o_out = c->add_option("--out", out, "output dataset JSON path");
    c->callback([this] { run(); });
  }

  void run() {
    FileConfig fc;
    fc.load(config_path_or_env(config));
    fc.apply(o_root, "root", root);
    fc.apply(o_split, "split", split);
    fc.apply(o_swap, "swap_corners", swap_corners);
    fc.apply(o_dw, "default_width", default_width);
    fc.apply(o_dh, "default_height", default_height);
    fc.apply(o_out, "out", out);
    if (root.empty() || out.empty())
      throw tilekit::validation_error("ingest: --root and --out are required");

    tilekit::LoadOptions opts;
    opts.default_dims = tilekit::ImageDims(default_width, default_height);
    opts.swap_corners = swap_corners;
    const auto images = tilekit::load_dataset(root, split, opts);

    ojson echo;
    echo["command"] = "ingest";
    echo["root"] = root;
    echo["split"] = split;
    echo["swap_corners"] = swap_corners;
    echo["default_width"] = default_width;
    echo["default_height"] = default_height;
    tilekit::save_dataset_file(out, images, echo);
    std::cout << "ingested " << images.size() << " images -> " << out << "\n";
  }
};

struct SynthCmd {
  std::string config, out, layout = "scatter", id_prefix = "synth";
  int images = 1, min_count = 0, max_count = 0, width = 1280, height = 720;
  double min_extent = 20, max_extent = 40, min_spacing = 0;
  std::uint64_t seed = 0;
  CLI::Option *o_images = nullptr, *o_minc = nullptr, *o_maxc = nullptr, *o_mine = nullptr,
              *o_maxe = nullptr, *o_spacing = nullptr, *o_w = nullptr, *o_h = nullptr,
              *o_seed = nullptr, *o_layout = nullptr, *o_prefix = nullptr, *o_out = nullptr;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("synth", "generate a synthetic dataset");
    c->add_option("--config", config, "JSON config file (or TILEKIT_CONFIG)");
    o_images = c->add_option("--images", images, "number of images");
    o_minc = c->add_option("--min-count", min_count, "min objects per image");
    o_maxc = c->add_option("--max-count", max_count, "max objects per image");
    o_mine = c->add_option("--min-extent", min_extent, "min object side, px");
    o_maxe = c->add_option("--max-extent", max_extent, "max object side, px");
    o_spacing = c->add_option("--min-spacing", min_spacing, "min gap between objects, px");
    o_w = c->add_option("--width", width, "image width");
    o_h = c->add_option("--height", height, "image height");
    o_seed = c->add_option("--seed", seed, "generator seed");
    o_layout = c->add_option("--layout", layout, "scatter or rows");
    o_prefix = c->add_option("--id-prefix", id_prefix, "image id prefix");
    o_out = c->add_option("--out", out, "output dataset JSON path");
    c->callback([this] { run(); });
  }

  void run() {
    FileConfig fc;
    fc.load(config_path_or_env(config));
    fc.apply(o_images, "images", images);
    fc.apply(o_minc, "min_count", min_count);
    fc.apply(o_maxc, "max_count", max_count);
    fc.apply(o_mine, "min_extent", min_extent);
    fc.apply(o_maxe, "max_extent", max_extent);
    fc.apply(o_spacing, "min_spacing", min_spacing);
    fc.apply(o_w, "width", width);
    fc.apply(o_h, "height", height);
    fc.apply(o_seed, "seed", seed);
    fc.apply(o_layout, "layout", layout);
    fc.apply(o_prefix, "id_prefix", id_prefix);
    fc.apply(o_out, "out", out);
    if (out.empty()) throw tilekit::validation_error("synth: --out is required");

    tilekit::SynthConfig sc;
    sc.dims = tilekit::ImageDims(width, height);
    sc.num_images = images;
    sc.min_count = min_count;
    sc.max_count = max_count;
    sc.min_extent = min_extent;
    sc.max_extent = max_extent;
    sc.min_spacing = min_spacing;
    sc.seed = seed;
    sc.id_prefix = id_prefix;
    if (layout == "scatter") {
      sc.layout = tilekit::SynthConfig::Layout::scatter;
    } else if (layout == "rows") {
      sc.layout = tilekit::SynthConfig::Layout::rows;
    } else {
      throw tilekit::validation_error("synth: layout must be scatter or rows");
    }
    const auto imgs = tilekit::synth_generate(sc);

    ojson echo;
    echo["command"] = "synth";
    echo["images"] = images;
    echo["min_count"] = min_count;
    echo["max_count"] = max_count;
    echo["min_extent"] = min_extent;
    echo["max_extent"] = max_extent;
    echo["min_spacing"] = min_spacing;
    echo["width"] = width;
    echo["height"] = height;
    echo["seed"] = seed;
    echo["layout"] = layout;
    echo["id_prefix"] = id_prefix;
    tilekit::save_dataset_file(out, imgs, echo);
    std::cout << "generated " << imgs.size() << " images -> " << out << "\n";
  }
};

struct PlanCmd {
  std::string config, dataset, out, target_nba = "0.04", i_nba_override;
  int input_resolution = 192, max_tiles = 1024;
  unsigned workers = tilekit::default_workers();
  CLI::Option *o_dataset = nullptr, *o_nba = nullptr, *o_res = nullptr, *o_override = nullptr,
              *o_cap = nullptr, *o_workers = nullptr, *o_out = nullptr;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("plan", "compute tile plans for a dataset");
    c->add_option("--config", config, "JSON config file (or TILEKIT_CONFIG)");
    o_dataset = c->add_option("--dataset", dataset, "dataset JSON path");
    o_nba = c->add_option("--target-nba", target_nba, "target NBA, fraction or percent");
    o_res = c->add_option("--input-resolution", input_resolution, "network input, px");
    o_override = c->add_option("--i-nba", i_nba_override,
                               "override object NBA (external size estimate)");
    o_cap = c->add_option("--max-tiles", max_tiles, "per-image tile cap");
    o_workers = c->add_option("--workers", workers, "worker threads");
    o_out = c->add_option("--out", out, "output manifest path");
    c->callback([this] { run(); });
  }

  void run() {
    FileConfig fc;
    fc.load(config_path_or_env(config));
    fc.apply(o_dataset, "dataset", dataset);
    fc.apply_str(o_nba, "target_nba", target_nba);
    fc.apply(o_res, "input_resolution", input_resolution);
    fc.apply_str(o_override, "i_nba", i_nba_override);
    fc.apply(o_cap, "max_tiles", max_tiles);
    fc.apply(o_workers, "workers", workers);
    fc.apply(o_out, "out", out);
    if (dataset.empty() || out.empty())
      throw tilekit::validation_error("plan: --dataset and --out are required");

    const auto images = tilekit::load_dataset_file(dataset);
    const tilekit::Nba target(parse_nba(target_nba));
    std::optional<tilekit::Nba> override_nba;
    if (!i_nba_override.empty()) override_nba = tilekit::Nba(parse_nba(i_nba_override));
    const auto plans = tilekit::plan_dataset(images, target, input_resolution, override_nba,
                                             max_tiles, workers);

    ojson echo;
    echo["command"] = "plan";
    echo["dataset"] = dataset;
    echo["target_nba"] = target.value;
    echo["input_resolution"] = input_resolution;
    if (override_nba) echo["i_nba"] = override_nba->value;
    echo["max_tiles"] = max_tiles;
    tilekit::save_manifest(out, plans, echo);

    double tiles = 0;
    for (const auto& p : plans) tiles += static_cast<double>(p.tile_count());
    std::printf("planned %zu images, avg %.2f tiles/image -> %s\n", plans.size(),
                tiles / static_cast<double>(plans.size()), out.c_str());
  }
};

struct CropCmd {
  std::string config, manifest, images_dir, out_dir;
  CLI::Option *o_manifest = nullptr, *o_images = nullptr, *o_out = nullptr;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("crop", "cut tiles out of PPM images and resample");
    c->add_option("--config", config, "JSON config file (or TILEKIT_CONFIG)");
    o_manifest = c->add_option("--manifest", manifest, "tile manifest path");
    o_images = c->add_option("--images-dir", images_dir, "directory of {image_id}.ppm files");
    o_out = c->add_option("--out-dir", out_dir, "output directory for tile crops");
    c->callback([this] { run(); });
  }

  void run() {
    FileConfig fc;
    fc.load(config_path_or_env(config));
    fc.apply(o_manifest, "manifest", manifest);
    fc.apply(o_images, "images_dir", images_dir);
    fc.apply(o_out, "out_dir", out_dir);
    if (manifest.empty() || images_dir.empty() || out_dir.empty())
      throw tilekit::validation_error("crop: --manifest, --images-dir and --out-dir are required");

    const auto plans = tilekit::load_manifest(manifest);
    // Validate and decode everything first; write only when all inputs are good.
    std::vector<std::vector<tilekit::PpmImage>> crops(plans.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
      const auto& plan = plans[i];
      const fs::path src = fs::path(images_dir) / (plan.image_id + ".ppm");
      const tilekit::PpmImage img = tilekit::read_ppm(src);
      if (img.width != plan.dims.width || img.height != plan.dims.height)
        throw tilekit::validation_error(src.string() + ": image is " +
                                        std::to_string(img.width) + "x" +
                                        std::to_string(img.height) + " but the plan says " +
                                        std::to_string(plan.dims.width) + "x" +
                                        std::to_string(plan.dims.height));
      for (const auto& tile : plan.tiles)
        crops[i].push_back(
            tilekit::crop_resample(img, tile.rect, plan.input_resolution));
    }
    fs::create_directories(out_dir);
    std::size_t written = 0;
    for (std::size_t i = 0; i < plans.size(); ++i) {
      const auto& plan = plans[i];
      for (std::size_t t = 0; t < plan.tiles.size(); ++t) {
        const auto& tile = plan.tiles[t];
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "_%d_%d.ppm", tile.col, tile.row);
        tilekit::write_ppm(fs::path(out_dir) / (plan.image_id + suffix), crops[i][t]);
        ++written;
      }
    }
    std::cout << "wrote " << written << " tile crops -> " << out_dir << "\n";
  }
};

struct SimulateCmd {
  std::string config, dataset, manifest, out, mode = "box";
  double miss_rate = 0, jitter_sigma = 0, fp_per_tile = 0, visibility = 0.25,
         score_threshold = 0.5;
  std::uint64_t seed = 0;
  unsigned workers = tilekit::default_workers();
  CLI::Option *o_dataset = nullptr, *o_manifest = nullptr, *o_mode = nullptr, *o_miss = nullptr,
              *o_jitter = nullptr, *o_fp = nullptr, *o_vis = nullptr, *o_score = nullptr,
              *o_seed = nullptr, *o_workers = nullptr, *o_out = nullptr;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("simulate", "run the simulated detector over all tiles");
    c->add_option("--config", config, "JSON config file (or TILEKIT_CONFIG)");
    o_dataset = c->add_option("--dataset", dataset, "dataset JSON path");
    o_manifest = c->add_option("--manifest", manifest, "tile manifest path");
    o_mode = c->add_option("--mode", mode, "box or grid");
    o_miss = c->add_option("--miss-rate", miss_rate, "per-object miss probability");
    o_jitter = c->add_option("--jitter-sigma", jitter_sigma, "corner jitter, fraction of extent");
    o_fp = c->add_option("--fp-per-tile", fp_per_tile, "mean false positives per tile");
    o_vis = c->add_option("--visibility-threshold", visibility,
                          "min visible fraction for detectability");
    o_score = c->add_option("--score-threshold", score_threshold, "grid cell score cut (grid mode)");
    o_seed = c->add_option("--seed", seed, "detector seed");
    o_workers = c->add_option("--workers", workers, "worker threads");
    o_out = c->add_option("--out", out, "output predictions JSONL path");
    c->callback([this] { run(); });
  }

  void run() {
    FileConfig fc;
    fc.load(config_path_or_env(config));
    fc.apply(o_dataset, "dataset", dataset);
    fc.apply(o_manifest, "manifest", manifest);
    fc.apply(o_mode, "mode", mode);
    fc.apply(o_miss, "miss_rate", miss_rate);
    fc.apply(o_jitter, "jitter_sigma", jitter_sigma);
    fc.apply(o_fp, "fp_per_tile", fp_per_tile);
    fc.apply(o_vis, "visibility_threshold", visibility);
    fc.apply(o_score, "score_threshold", score_threshold);
    fc.apply(o_seed, "seed", seed);
    fc.apply(o_workers, "workers", workers);
    fc.apply(o_out, "out", out);
    if (dataset.empty() || manifest.empty() || out.empty())
      throw tilekit::validation_error("simulate: --dataset, --manifest and --out are required");

    tilekit::DetectorMode dm;
    if (mode == "box") {
      dm = tilekit::DetectorMode::box;
    } else if (mode == "grid") {
      dm = tilekit::DetectorMode::grid;
    } else {
      throw tilekit::validation_error("simulate: mode must be box or grid");
    }

    const auto images = tilekit::load_dataset_file(dataset);
    const auto plans = tilekit::align_plans(images, tilekit::load_manifest(manifest));
    tilekit::SimDetectorConfig sim;
    sim.miss_rate = miss_rate;
    sim.jitter_sigma = jitter_sigma;
    sim.fp_per_tile = fp_per_tile;
    sim.visibility_threshold = visibility;
    sim.seed = seed;
    const auto preds =
        tilekit::simulate_dataset(images, plans, sim, dm, score_threshold, workers);

    ojson echo;
    echo["command"] = "simulate";
    echo["dataset"] = dataset;
    echo["manifest"] = manifest;
    echo["mode"] = mode;
    echo["miss_rate"] = miss_rate;
    echo["jitter_sigma"] = jitter_sigma;
    echo["fp_per_tile"] = fp_per_tile;
    echo["visibility_threshold"] = visibility;
    echo["score_threshold"] = score_threshold;
    echo["seed"] = seed;
    tilekit::save_predictions(out, preds, echo);

    std::size_t n = 0;
    for (const auto& [id, tiles] : preds)
      for (const auto& [t, v] : tiles) n += v.size();
    std::cout << "simulated " << n << " detections -> " << out << "\n";
  }
};

struct FuseCmd {
  std::string config, manifest, predictions, out, strategy = "one_way_ratio",
              reduce = "largest_box";
  double threshold = -1;  // default depends on strategy
  unsigned workers = tilekit::default_workers();
  CLI::Option *o_manifest = nullptr, *o_preds = nullptr, *o_strategy = nullptr,
              *o_threshold = nullptr, *o_reduce = nullptr, *o_workers = nullptr, *o_out = nullptr;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("fuse", "fuse per-tile predictions into global detections");
    c->add_option("--config", config, "JSON config file (or TILEKIT_CONFIG)");
    o_manifest = c->add_option("--manifest", manifest, "tile manifest path");
    o_preds = c->add_option("--predictions", predictions, "predictions JSONL path");
    o_strategy = c->add_option("--strategy", strategy, "iou, one_way_ratio, or adjacency");
    o_threshold = c->add_option("--threshold", threshold,
                                "match threshold (default 0.25 iou / 0.8 one-way)");
    o_reduce = c->add_option("--reduce", reduce, "largest_box or max_confidence");
    o_workers = c->add_option("--workers", workers, "worker threads");
    o_out = c->add_option("--out", out, "output fused JSONL path");
    c->callback([this] { run(); });
  }

  void run() {
    FileConfig fc;
    fc.load(config_path_or_env(config));
    fc.apply(o_manifest, "manifest", manifest);
    fc.apply(o_preds, "predictions", predictions);
    fc.apply(o_strategy, "strategy", strategy);
    fc.apply(o_threshold, "threshold", threshold);
    fc.apply(o_reduce, "reduce", reduce);
    fc.apply(o_workers, "workers", workers);
    fc.apply(o_out, "out", out);
    if (manifest.empty() || predictions.empty() || out.empty())
      throw tilekit::validation_error("fuse: --manifest, --predictions and --out are required");

    const auto plans = tilekit::load_manifest(manifest);
    const auto preds = tilekit::load_external(predictions, plans);

    tilekit::FusionConfig cfg;
    tilekit::FuseMode mode = tilekit::FuseMode::cross_tile;
    if (strategy == "adjacency") {
      mode = tilekit::FuseMode::adjacency_baseline;
      cfg.threshold = 1.0;  // unused in this mode
    } else {
      cfg.strategy = tilekit::strategy_from_name(strategy);
      cfg.threshold = threshold > 0 ? threshold : tilekit::default_threshold(cfg.strategy);
    }
    if (reduce == "largest_box") {
      cfg.reduce_policy = tilekit::ReducePolicy::largest_box;
    } else if (reduce == "max_confidence") {
      cfg.reduce_policy = tilekit::ReducePolicy::max_confidence;
    } else {
      throw tilekit::validation_error("fuse: reduce must be largest_box or max_confidence");
    }

    const auto fused = tilekit::fuse_dataset(plans, preds, cfg, mode, workers);

    ojson echo;
    echo["command"] = "fuse";
    echo["manifest"] = manifest;
    echo["predictions"] = predictions;
    echo["strategy"] = strategy;
    if (strategy != "adjacency") echo["threshold"] = cfg.threshold;
    echo["reduce"] = reduce;
    tilekit::save_fused(out, fused, echo);

    std::size_t n = 0;
    for (const auto& [id, v] : fused) n += v.size();
    std::cout << "fused to " << n << " detections -> " << out << "\n";
  }
};

struct EvalCmd {
  std::string config, dataset, fused, out, csv, match = "iou";
  double match_iou = 0.5;
  unsigned workers = tilekit::default_workers();
  CLI::Option *o_dataset = nullptr, *o_fused = nullptr, *o_match = nullptr, *o_miou = nullptr,
              *o_workers = nullptr, *o_out = nullptr, *o_csv = nullptr;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("eval", "score fused detections against ground truth");
    c->add_option("--config", config, "JSON config file (or TILEKIT_CONFIG)");
    o_dataset = c->add_option("--dataset", dataset, "dataset JSON path");
    o_fused = c->add_option("--fused", fused, "fused detections JSONL path");
    o_match = c->add_option("--match", match, "TP criterion: centroid or iou");
    o_miou = c->add_option("--match-iou", match_iou, "IoU threshold for --match iou");
    o_workers = c->add_option("--workers", workers, "worker threads");
    o_out = c->add_option("--out", out, "output report JSON path");
    o_csv = c->add_option("--csv", csv, "optional per-image CSV path");
    c->callback([this] { run(); });
  }

  void run() {
    FileConfig fc;
    fc.load(config_path_or_env(config));
    fc.apply(o_dataset, "dataset", dataset);
    fc.apply(o_fused, "fused", fused);
    fc.apply(o_match, "match", match);
    fc.apply(o_miou, "match_iou", match_iou);
    fc.apply(o_workers, "workers", workers);
    fc.apply(o_out, "out", out);
    fc.apply(o_csv, "csv", csv);
    if (dataset.empty() || fused.empty() || out.empty())
      throw tilekit::validation_error("eval: --dataset, --fused and --out are required");

    const auto images = tilekit::load_dataset_file(dataset);
    const auto dets = tilekit::load_fused(fused);
    const auto mc = make_match_config(match, match_iou);
    const auto rep = tilekit::evaluate_dataset(images, dets, mc, workers);

    ojson echo;
    echo["command"] = "eval";
    echo["dataset"] = dataset;
    echo["fused"] = fused;
    echo["match"] = match;
    echo["match_iou"] = match_iou;
    tilekit::save_report(out, rep, echo);
    if (!csv.empty()) tilekit::save_report_csv(csv, rep);

    std::printf("P %.4f  R %.4f  F1 %.4f  count MAE %.4f -> %s\n", rep.precision, rep.recall,
                rep.f1, rep.count_mae, out.c_str());
  }
};

struct SweepCmd {
  std::string config, dataset, out_dir, nba_list = "0.8%,2%,4%,6%",
              strategies = "one_way_ratio", mode = "box", match = "iou",
              profile_file, profile_name, reduce = "largest_box";
  double miss_rate = 0, jitter_sigma = 0, fp_per_tile = 0, visibility = 0.25,
         score_threshold = 0.5, match_iou = 0.5, iou_threshold = -1, one_way_threshold = -1,
         overhead = 0;
  int input_resolution = 192, max_tiles = 1024;
  std::uint64_t seed = 0;
  unsigned workers = tilekit::default_workers();
  CLI::Option *o_dataset = nullptr, *o_nbas = nullptr, *o_strats = nullptr, *o_mode = nullptr,
              *o_res = nullptr, *o_miss = nullptr, *o_jitter = nullptr, *o_fp = nullptr,
              *o_vis = nullptr, *o_score = nullptr, *o_match = nullptr, *o_miou = nullptr,
              *o_iout = nullptr, *o_owt = nullptr, *o_reduce = nullptr, *o_profile = nullptr,
              *o_pname = nullptr, *o_overhead = nullptr, *o_cap = nullptr, *o_seed = nullptr,
              *o_workers = nullptr, *o_out = nullptr;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("sweep",
                                 "plan/simulate/fuse/eval across target NBAs and strategies");
    c->add_option("--config", config, "JSON config file (or TILEKIT_CONFIG)");
    o_dataset = c->add_option("--dataset", dataset, "dataset JSON path");
    o_nbas = c->add_option("--nba-list", nba_list, "comma list of target NBAs");
    o_strats = c->add_option("--strategies", strategies, "comma list: iou,one_way_ratio");
    o_mode = c->add_option("--mode", mode, "detector mode: box or grid");
    o_res = c->add_option("--input-resolution", input_resolution, "network input, px");
    o_miss = c->add_option("--miss-rate", miss_rate, "sim miss probability");
    o_jitter = c->add_option("--jitter-sigma", jitter_sigma, "sim corner jitter");
    o_fp = c->add_option("--fp-per-tile", fp_per_tile, "sim false positives per tile");
    o_vis = c->add_option("--visibility-threshold", visibility, "sim visibility threshold");
    o_score = c->add_option("--score-threshold", score_threshold, "grid score cut");
    o_match = c->add_option("--match", match, "TP criterion: centroid or iou");
    o_miou = c->add_option("--match-iou", match_iou, "IoU threshold for --match iou");
    o_iout = c->add_option("--iou-threshold", iou_threshold, "fusion threshold for iou strategy");
    o_owt = c->add_option("--one-way-threshold", one_way_threshold,
                          "fusion threshold for one_way_ratio strategy");
    o_reduce = c->add_option("--reduce", reduce, "largest_box or max_confidence");
    o_profile = c->add_option("--profile", profile_file, "device profile JSON list");
    o_pname = c->add_option("--profile-name", profile_name, "profile to cost with");
    o_overhead = c->add_option("--overhead", overhead, "per-image overhead, seconds");
    o_cap = c->add_option("--max-tiles", max_tiles, "per-image tile cap");
    o_seed = c->add_option("--seed", seed, "detector seed");
    o_workers = c->add_option("--workers", workers, "worker threads");
    o_out = c->add_option("--out-dir", out_dir, "output directory (sweep.json, sweep.csv)");
    c->callback([this] { run(); });
  }

  void run() {
    FileConfig fc;
    fc.load(config_path_or_env(config));
    fc.apply(o_dataset, "dataset", dataset);
    fc.apply_str(o_nbas, "nba_list", nba_list);
    fc.apply(o_strats, "strategies", strategies);
    fc.apply(o_mode, "mode", mode);
    fc.apply(o_res, "input_resolution", input_resolution);
    fc.apply(o_miss, "miss_rate", miss_rate);
    fc.apply(o_jitter, "jitter_sigma", jitter_sigma);
    fc.apply(o_fp, "fp_per_tile", fp_per_tile);
    fc.apply(o_vis, "visibility_threshold", visibility);
    fc.apply(o_score, "score_threshold", score_threshold);
    fc.apply(o_match, "match", match);
    fc.apply(o_miou, "match_iou", match_iou);
    fc.apply(o_iout, "iou_threshold", iou_threshold);
    fc.apply(o_owt, "one_way_threshold", one_way_threshold);
    fc.apply(o_reduce, "reduce", reduce);
    fc.apply(o_profile, "profile", profile_file);
    fc.apply(o_pname, "profile_name", profile_name);
    fc.apply(o_overhead, "overhead", overhead);
    fc.apply(o_cap, "max_tiles", max_tiles);
    fc.apply(o_seed, "seed", seed);
    fc.apply(o_workers, "workers", workers);
    fc.apply(o_out, "out_dir", out_dir);
    if (dataset.empty() || out_dir.empty())
      throw tilekit::validation_error("sweep: --dataset and --out-dir are required");

    const auto images = tilekit::load_dataset_file(dataset);

    tilekit::SweepSettings s;
    s.nba_values = parse_nba_list(nba_list);
    s.strategies = split_list(strategies);
    s.input_resolution = input_resolution;
    s.sim.miss_rate = miss_rate;
    s.sim.jitter_sigma = jitter_sigma;
    s.sim.fp_per_tile = fp_per_tile;
    s.sim.visibility_threshold = visibility;
    s.sim.seed = seed;
    if (mode == "box") {
      s.detector_mode = tilekit::DetectorMode::box;
    } else if (mode == "grid") {
      s.detector_mode = tilekit::DetectorMode::grid;
    } else {
      throw tilekit::validation_error("sweep: mode must be box or grid");
    }
    s.score_threshold = score_threshold;
    if (reduce == "largest_box") {
      s.reduce_policy = tilekit::ReducePolicy::largest_box;
    } else if (reduce == "max_confidence") {
      s.reduce_policy = tilekit::ReducePolicy::max_confidence;
    } else {
      throw tilekit::validation_error("sweep: reduce must be largest_box or max_confidence");
    }
    if (iou_threshold > 0) s.iou_threshold = iou_threshold;
    if (one_way_threshold > 0) s.one_way_threshold = one_way_threshold;
    s.matching = make_match_config(match, match_iou);
    if (!profile_file.empty()) {
      const auto profiles = tilekit::load_profiles(profile_file);
      if (profile_name.empty())
        throw tilekit::validation_error("sweep: --profile-name required with --profile");
      s.profile = tilekit::find_profile(profiles, profile_name);
    }
    s.overhead_per_image = overhead;
    s.max_tiles = max_tiles;
    s.workers = workers;

    const auto rows = tilekit::sweep_dataset(images, s);

    ojson echo;
    echo["command"] = "sweep";
    echo["dataset"] = dataset;
    echo["nba_list"] = s.nba_values;
    echo["strategies"] = s.strategies;
    echo["mode"] = mode;
    echo["input_resolution"] = input_resolution;
    echo["miss_rate"] = miss_rate;
    echo["jitter_sigma"] = jitter_sigma;
    echo["fp_per_tile"] = fp_per_tile;
    echo["visibility_threshold"] = visibility;
    echo["score_threshold"] = score_threshold;
    echo["match"] = match;
    echo["match_iou"] = match_iou;
    echo["iou_threshold"] = s.iou_threshold ? ojson(*s.iou_threshold) : ojson(nullptr);
    echo["one_way_threshold"] =
        s.one_way_threshold ? ojson(*s.one_way_threshold) : ojson(nullptr);
    echo["reduce"] = reduce;
    echo["profile"] = profile_name;
    echo["overhead"] = overhead;
    echo["max_tiles"] = max_tiles;
    echo["seed"] = seed;

    ojson doc = tilekit::detail::envelope(echo);
    ojson jrows = ojson::array();
    std::ostringstream csv;
    csv << "target_nba,strategy,avg_tiles,f1,precision,recall,count_mae,fps\n";
    char buf[256];
    for (const auto& r : rows) {
      ojson jr;
      jr["target_nba"] = r.target_nba;
      jr["strategy"] = r.strategy;
      jr["avg_tiles"] = r.avg_tiles;
      jr["f1"] = r.f1;
      jr["precision"] = r.precision;
      jr["recall"] = r.recall;
      jr["count_mae"] = r.count_mae;
      jr["fps"] = r.fps ? ojson(*r.fps) : ojson(nullptr);
      jrows.push_back(std::move(jr));
      std::snprintf(buf, sizeof(buf), "%.6g,%s,%.6g,%.6g,%.6g,%.6g,%.6g,", r.target_nba,
                    r.strategy.c_str(), r.avg_tiles, r.f1, r.precision, r.recall, r.count_mae);
      csv << buf;
      if (r.fps) {
        std::snprintf(buf, sizeof(buf), "%.6g", *r.fps);
        csv << buf;
      }
      csv << "\n";
    }
    doc["rows"] = std::move(jrows);

    tilekit::detail::write_file(fs::path(out_dir) / "sweep.json", doc.dump(2) + "\n");
    tilekit::detail::write_file(fs::path(out_dir) / "sweep.csv", csv.str());

    std::printf("%-12s %-14s %-10s %-8s %-8s %-8s %-10s %s\n", "target_nba", "strategy",
                "avg_tiles", "f1", "prec", "recall", "count_mae", "fps");
    for (const auto& r : rows) {
      std::printf("%-12.4g %-14s %-10.2f %-8.3f %-8.3f %-8.3f %-10.3f", r.target_nba,
                  r.strategy.c_str(), r.avg_tiles, r.f1, r.precision, r.recall, r.count_mae);
      if (r.fps)
        std::printf(" %.1f", *r.fps);
      std::printf("\n");
    }
  }
};

struct CostCmd {
  std::string config, profile_file, profile_name, dataset, avg_tiles_list, nba_list, out;
  int input_resolution = 192, max_tiles = 1024;
  double overhead = 0;
  CLI::Option *o_profile = nullptr, *o_pname = nullptr, *o_dataset = nullptr, *o_tiles = nullptr,
              *o_nbas = nullptr, *o_res = nullptr, *o_overhead = nullptr, *o_cap = nullptr,
              *o_out = nullptr;

  void attach(CLI::App& app) {
    auto* c = app.add_subcommand("cost", "estimate latency/fps/energy for tiled inference");
    c->add_option("--config", config, "JSON config file (or TILEKIT_CONFIG)");
    o_profile = c->add_option("--profile", profile_file, "device profile JSON list");
    o_pname = c->add_option("--profile-name", profile_name, "profile to use");
    o_tiles = c->add_option("--avg-tiles", avg_tiles_list, "comma list of avg tile counts");
    o_dataset = c->add_option("--dataset", dataset, "dataset JSON (derive tiles per NBA)");
    o_nbas = c->add_option("--nba-list", nba_list, "target NBAs for --dataset mode");
    o_res = c->add_option("--input-resolution", input_resolution, "network input, px");
    o_overhead = c->add_option("--overhead", overhead, "per-image overhead, seconds");
    o_cap = c->add_option("--max-tiles", max_tiles, "per-image tile cap");
    o_out = c->add_option("--out", out, "optional output JSON path");
    c->callback([this] { run(); });
  }

  void run() {
    FileConfig fc;
    fc.load(config_path_or_env(config));
    fc.apply(o_profile, "profile", profile_file);
    fc.apply(o_pname, "profile_name", profile_name);
    fc.apply_str(o_tiles, "avg_tiles", avg_tiles_list);
    fc.apply(o_dataset, "dataset", dataset);
    fc.apply_str(o_nbas, "nba_list", nba_list);
    fc.apply(o_res, "input_resolution", input_resolution);
    fc.apply(o_overhead, "overhead", overhead);
    fc.apply(o_cap, "max_tiles", max_tiles);
    fc.apply(o_out, "out", out);
    if (profile_file.empty() || profile_name.empty())
      throw tilekit::validation_error("cost: --profile and --profile-name are required");
    if (avg_tiles_list.empty() == dataset.empty())
      throw tilekit::validation_error("cost: give exactly one of --avg-tiles or --dataset");

    const auto profiles = tilekit::load_profiles(profile_file);
    const auto& profile = tilekit::find_profile(profiles, profile_name);

    struct Row {
      std::optional<double> target_nba;
      tilekit::CostEstimate est;
    };
    std::vector<Row> rows;
    if (!avg_tiles_list.empty()) {
      for (double t : parse_double_list(avg_tiles_list))
        rows.push_back({std::nullopt, tilekit::estimate(t, profile, overhead)});
    } else {
      const auto images = tilekit::load_dataset_file(dataset);
      for (double nba : parse_nba_list(nba_list.empty() ? "0.8%,2%,4%,6%" : nba_list)) {
        const double tiles = tilekit::avg_tiles(images, tilekit::Nba(nba), input_resolution,
                                                std::nullopt, max_tiles);
        rows.push_back({nba, tilekit::estimate(tiles, profile, overhead)});
      }
    }

    std::printf("%-12s %-10s %-14s %-8s %-14s\n", "target_nba", "avg_tiles", "latency_ms",
                "fps", "energy_mj");
    for (const auto& r : rows) {
      if (r.target_nba)
        std::printf("%-12.4g ", *r.target_nba);
      else
        std::printf("%-12s ", "-");
      std::printf("%-10.2f %-14.3f %-8.1f %-14.4f\n", r.est.avg_tiles,
                  r.est.latency_per_image * 1e3, r.est.fps, r.est.energy_per_image * 1e3);
    }

    if (!out.empty()) {
      ojson echo;
      echo["command"] = "cost";
      echo["profile"] = profile_name;
      echo["overhead"] = overhead;
      if (!avg_tiles_list.empty()) echo["avg_tiles"] = avg_tiles_list;
      if (!dataset.empty()) {
        echo["dataset"] = dataset;
        echo["nba_list"] = nba_list;
        echo["input_resolution"] = input_resolution;
      }
      ojson doc = tilekit::detail::envelope(echo);
      ojson jrows = ojson::array();
      for (const auto& r : rows) {
        ojson jr;
        jr["target_nba"] = r.target_nba ? ojson(*r.target_nba) : ojson(nullptr);
        jr["avg_tiles"] = r.est.avg_tiles;
        jr["latency_per_image"] = r.est.latency_per_image;
        jr["fps"] = r.est.fps;
        jr["energy_per_image"] = r.est.energy_per_image;
        jrows.push_back(std::move(jr));
      }
      doc["rows"] = std::move(jrows);
      tilekit::detail::write_file(out, doc.dump(2) + "\n");
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tilekit: adaptive tiling toolkit for small-object detection"};
  app.require_subcommand(1);

  IngestCmd ingest;
  SynthCmd synth;
  PlanCmd plan;
  CropCmd crop;
  SimulateCmd simulate;
  FuseCmd fuse;
  EvalCmd eval;
  SweepCmd sweep;
  CostCmd cost;
  ingest.attach(app);
  synth.attach(app);
  plan.attach(app);
  crop.attach(app);
  simulate.attach(app);
  fuse.attach(app);
  eval.attach(app);
  sweep.attach(app);
  cost.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const tilekit::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tilekit::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "helpers.hpp"
#include "tilekit/dataset.hpp"
#include "tilekit/io.hpp"

using namespace tilekit;

TEST_CASE("annotation grammar", "[dataset]") {
  SECTION("five-field record") {
    const auto boxes = parse_annotation_file("718 316 775 355 1\n");
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].box == BBox(718, 316, 775, 355));
    CHECK(boxes[0].class_id == 1);
  }
  SECTION("four fields default the class") {
    const auto boxes = parse_annotation_file("1 2 3 4");
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].class_id == 1);
  }
  SECTION("blank lines ignored, empty file empty result") {
    CHECK(parse_annotation_file("").empty());
    CHECK(parse_annotation_file("\n  \n\n").empty());
    CHECK(parse_annotation_file("\n1 2 3 4\n\n5 6 7 8 2\n").size() == 2);
  }
  SECTION("corner swap flag") {
    ParseOptions swap;
    swap.swap_corners = true;
    const auto boxes = parse_annotation_file("10 10 5 5", swap);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].box == BBox(5, 5, 10, 10));
    CHECK_THROWS_AS(parse_annotation_file("10 10 5 5"), validation_error);
  }
  SECTION("errors carry line numbers") {
    CHECK_THROWS_WITH(parse_annotation_file("1 2 3 4\n1 2 3\n"),
                      Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(parse_annotation_file("1 2 x 4\n"),
                      Catch::Matchers::ContainsSubstring("non-numeric"));
    CHECK_THROWS_WITH(parse_annotation_file("1 2 3 4 1.5\n"),
                      Catch::Matchers::ContainsSubstring("not an integer"));
    CHECK_THROWS_WITH(parse_annotation_file("1 2 3 4 5 6\n"),
                      Catch::Matchers::ContainsSubstring("expected 4 or 5 fields"));
  }
}

TEST_CASE("split loading", "[dataset]") {
  testutil::TempDir tmp("dataset");
  const auto root = tmp.path();
  std::filesystem::create_directories(root / "ImageSets");
  std::filesystem::create_directories(root / "Annotations");

  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
  };
  write(root / "ImageSets" / "test.txt", "img_a\nimg_b\n");
  write(root / "Annotations" / "img_a.txt", "10 10 50 40 1\n60 60 90 95 1\n");
  write(root / "Annotations" / "img_b.txt", "");

  SECTION("two listed ids load in order") {
    const auto ds = load_dataset(root, "test");
    REQUIRE(ds.size() == 2);
    CHECK(ds[0].image_id == "img_a");
    CHECK(ds[0].boxes.size() == 2);
    CHECK(ds[1].boxes.empty());
    CHECK(ds[0].dims.width == 1280);  // default when no sidecar
  }
  SECTION("sidecar dimension index wins") {
    write(root / "image_dims.json", R"({"img_a": [640, 480], "img_b": [320, 200]})");
    const auto ds = load_dataset(root, "test");
    CHECK(ds[0].dims.width == 640);
    CHECK(ds[1].dims.height == 200);
  }
  SECTION("boxes clamp to image bounds") {
    write(root / "image_dims.json", R"({"img_a": [40, 40], "img_b": [320, 200]})");
    const auto ds = load_dataset(root, "test");
    CHECK(ds[0].boxes[1].box == BBox(40, 40, 40, 40));
  }
  SECTION("missing annotation names the id") {
    write(root / "ImageSets" / "bad.txt", "img_a\nimg_missing\n");
    CHECK_THROWS_WITH(load_dataset(root, "bad"),
                      Catch::Matchers::ContainsSubstring("img_missing"));
  }
  SECTION("duplicate id rejected") {
    write(root / "ImageSets" / "dup.txt", "img_a\nimg_a\n");
    CHECK_THROWS_AS(load_dataset(root, "dup"), validation_error);
  }
  SECTION("empty split loads nothing") {
    write(root / "ImageSets" / "none.txt", "\n");
    CHECK(load_dataset(root, "none").empty());
  }
  SECTION("missing split file is an io error") {
    CHECK_THROWS_AS(load_dataset(root, "nope"), io_error);
  }
}

TEST_CASE("synthetic generator", "[dataset]") {
  SynthConfig cfg;
  cfg.dims = ImageDims(1280, 720);
  cfg.num_images = 10;
  cfg.min_count = 20;
  cfg.max_count = 60;
  cfg.min_extent = 20;
  cfg.max_extent = 40;
  cfg.min_spacing = 2.0;
  cfg.seed = 77;

  SECTION("deterministic per seed, byte-identical serialization") {
    const auto a = synth_generate(cfg);
    const auto b = synth_generate(cfg);
    CHECK(dataset_to_json(a).dump() == dataset_to_json(b).dump());
    SynthConfig other = cfg;
    other.seed = 78;
    CHECK(dataset_to_json(a).dump() != dataset_to_json(synth_generate(other)).dump());
  }

  SECTION("bounds, spacing and NBA range audit") {
    const auto ds = synth_generate(cfg);
    REQUIRE(ds.size() == 10);
    for (const auto& img : ds) {
      REQUIRE(img.boxes.size() >= 20);
      REQUIRE(img.boxes.size() <= 60);
      for (const auto& lb : img.boxes) {
        CHECK(lb.box.x_min >= 0.0);
        CHECK(lb.box.y_min >= 0.0);
        CHECK(lb.box.x_max <= 1280.0);
        CHECK(lb.box.y_max <= 720.0);
        const double nba = lb.box.area() / img.dims.area();
        CHECK(nba >= 20.0 * 20.0 / img.dims.area() - 1e-12);
        CHECK(nba <= 40.0 * 40.0 / img.dims.area() + 1e-12);
      }
      // Brute-force pairwise separation audit.
      for (std::size_t i = 0; i < img.boxes.size(); ++i)
        for (std::size_t j = i + 1; j < img.boxes.size(); ++j)
          CHECK(detail::box_separation(img.boxes[i].box, img.boxes[j].box) >=
                cfg.min_spacing - 1e-9);
    }
  }

  SECTION("zero-count images") {
    SynthConfig none = cfg;
    none.min_count = none.max_count = 0;
    const auto ds = synth_generate(none);
    for (const auto& img : ds) CHECK(img.boxes.empty());
  }

  SECTION("impossible demand errors") {
    SynthConfig dense = cfg;
    dense.dims = ImageDims(100, 100);
    dense.min_count = dense.max_count = 50;
    dense.min_spacing = 30.0;
    CHECK_THROWS_AS(synth_generate(dense), validation_error);
  }

  SECTION("rows layout abuts boxes when spacing is zero") {
    SynthConfig rows = cfg;
    rows.layout = SynthConfig::Layout::rows;
    rows.min_spacing = 0.0;
    rows.num_images = 1;
    rows.min_count = rows.max_count = 10;
    const auto ds = synth_generate(rows);
    REQUIRE(ds.size() == 1);
    REQUIRE(ds[0].boxes.size() == 10);
    // Consecutive boxes in a row share an edge.
    const auto& b0 = ds[0].boxes[0].box;
    const auto& b1 = ds[0].boxes[1].box;
    CHECK(b1.x_min == b0.x_max);
  }
}

TEST_CASE("canonical dataset round trip", "[dataset]") {
  SynthConfig cfg;
  cfg.num_images = 3;
  cfg.min_count = 5;
  cfg.max_count = 9;
  cfg.seed = 3;
  const auto ds = synth_generate(cfg);

  testutil::TempDir tmp("roundtrip");
  const auto path = tmp.path() / "dataset.json";
  save_dataset_file(path, ds);
  const auto loaded = load_dataset_file(path);
  CHECK(dataset_to_json(loaded).dump() == dataset_to_json(ds).dump());

  SECTION("duplicate ids rejected on load") {
    auto dup = ds;
    dup.push_back(dup.front());
    save_dataset_file(path, dup);
    CHECK_THROWS_AS(load_dataset_file(path), validation_error);
  }
}

// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "tilekit/tiling.hpp"

using namespace tilekit;

namespace {

ImageAnnotations annotations_with_areas(const std::vector<double>& areas) {
  ImageAnnotations ann;
  ann.image_id = "img";
  ann.dims = ImageDims(100, 100);
  for (double a : areas) {
    const double side = std::sqrt(a);
    ann.boxes.push_back({BBox(0, 0, side, side), 1});
  }
  return ann;
}

std::vector<int> axis_offsets(const TilePlan& plan) {
  std::vector<int> xs;
  for (int col = 0; col < plan.grid_x; ++col)
    xs.push_back(static_cast<int>(plan.tile_at(col, 0).rect.x_min));
  return xs;
}

}  // namespace

TEST_CASE("object_stats", "[tiling]") {
  SECTION("single box") {
    const auto s = object_stats(annotations_with_areas({100.0}), ImageDims(100, 100));
    CHECK_THAT(s.mean_nba.value, Catch::Matchers::WithinAbs(0.01, 1e-12));
    CHECK_THAT(s.mean_extent, Catch::Matchers::WithinAbs(10.0, 1e-9));
  }
  SECTION("two boxes") {
    const auto s = object_stats(annotations_with_areas({100.0, 300.0}), ImageDims(100, 100));
    CHECK_THAT(s.mean_nba.value, Catch::Matchers::WithinAbs(0.02, 1e-12));
    CHECK_THAT(s.mean_extent, Catch::Matchers::WithinAbs(std::sqrt(200.0), 1e-9));
  }
  SECTION("empty errors") {
    CHECK_THROWS_AS(object_stats(annotations_with_areas({}), ImageDims(100, 100)),
                    validation_error);
  }
  SECTION("all zero-area errors") {
    ImageAnnotations ann;
    ann.image_id = "z";
    ann.dims = ImageDims(10, 10);
    ann.boxes.push_back({BBox(1, 1, 1, 5), 1});
    CHECK_THROWS_AS(object_stats(ann, ann.dims), validation_error);
  }
}

TEST_CASE("compute_tile_size", "[tiling]") {
  // Equal source and target NBA: the tile is the whole (square) image.
  CHECK(compute_tile_size(ImageDims(1000, 1000), Nba(0.01), Nba(0.01), 192) == 1000);
  CHECK(compute_tile_size(ImageDims(1280, 720), Nba(0.001), Nba(0.004), 192) == 480);
  // sqrt(1048576 * 0.0008 / 0.008) = sqrt(104857.6) = 323.82 -> 324
  CHECK(compute_tile_size(ImageDims(1024, 1024), Nba(0.0008), Nba(0.008), 192) == 324);
  // Clamping: tiny raw value is lifted to the input resolution...
  CHECK(compute_tile_size(ImageDims(1000, 1000), Nba(0.0001), Nba(0.9), 192) == 192);
  // ...and a huge one capped at the short image side.
  CHECK(compute_tile_size(ImageDims(1280, 720), Nba(0.9), Nba(0.0001), 192) == 720);
}

TEST_CASE("tile size identity before clamping", "[tiling]") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(64, 4096);
  std::uniform_real_distribution<double> nba(1e-5, 0.5);
  for (int i = 0; i < 20000; ++i) {
    const ImageDims dims(dim(rng), dim(rng));
    const Nba i_nba(nba(rng)), t_nba(nba(rng));
    const double raw = tile_size_raw(dims, i_nba, t_nba);
    const double lhs = raw * raw * t_nba.value;
    const double rhs = dims.area() * i_nba.value;
    CHECK(std::abs(lhs - rhs) <= 1e-9 * rhs);
  }
}

TEST_CASE("plan_tiles worked axis examples", "[tiling]") {
  // min_overlap = 1.5 * mean_extent, so extent 100/1.5 demands 100 px overlap.
  SECTION("overlap 100 -> 3 tiles at {0,300,600}") {
    const auto plan = plan_tiles("a", ImageDims(1000, 1000), 400, 100.0 / 1.5, 200);
    CHECK(plan.grid_x == 3);
    CHECK(axis_offsets(plan) == std::vector<int>{0, 300, 600});
    CHECK(plan.tile_at(1, 0).rect.x_min - plan.tile_at(0, 0).rect.x_min == 300);
  }
  SECTION("overlap 150 -> 4 tiles at {0,200,400,600}") {
    const auto plan = plan_tiles("a", ImageDims(1000, 1000), 400, 150.0 / 1.5, 200);
    CHECK(plan.grid_x == 4);
    CHECK(axis_offsets(plan) == std::vector<int>{0, 200, 400, 600});
  }
  SECTION("tile covering the whole axis") {
    const auto plan = plan_tiles("a", ImageDims(400, 1000), 400, 50.0, 200);
    CHECK(plan.grid_x == 1);
    CHECK(plan.tile_at(0, 0).rect.x_min == 0.0);
  }
}

TEST_CASE("plan_tiles validates inputs", "[tiling]") {
  CHECK_THROWS_AS(plan_tiles("a", ImageDims(100, 100), 400, 10, 192), validation_error);
  CHECK_THROWS_AS(plan_tiles("a", ImageDims(1000, 1000), 100, 10, 192), validation_error);
  // Overlap demand at the tile size itself can never be met.
  CHECK_THROWS_AS(plan_tiles("a", ImageDims(1000, 1000), 200, 300, 192), validation_error);
}

TEST_CASE("plan coverage and overlap over random inputs", "[tiling]") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(200, 4000);
  for (int i = 0; i < 2000; ++i) {
    const ImageDims dims(dim(rng), dim(rng));
    std::uniform_int_distribution<int> tile_dist(64, std::min(dims.width, dims.height));
    const int tile = tile_dist(rng);
    std::uniform_real_distribution<double> ext_dist(1.0, tile / 3.0);
    const double extent = ext_dist(rng);
    const auto plan = plan_tiles("r", dims, tile, extent, 64, 1 << 20);

    // Square tiles inside the image.
    for (const auto& t : plan.tiles) {
      CHECK(t.rect.width() == tile);
      CHECK(t.rect.height() == tile);
      CHECK(t.rect.x_min >= 0.0);
      CHECK(t.rect.y_min >= 0.0);
      CHECK(t.rect.x_max <= dims.width);
      CHECK(t.rect.y_max <= dims.height);
    }
    // Exact interval coverage and pairwise overlap per axis.
    const double need = 1.5 * extent - 1.0;
    for (int axis = 0; axis < 2; ++axis) {
      const int n = axis == 0 ? plan.grid_x : plan.grid_y;
      const int len = axis == 0 ? dims.width : dims.height;
      std::vector<double> offs;
      for (int k = 0; k < n; ++k) {
        const Tile& t = axis == 0 ? plan.tile_at(k, 0) : plan.tile_at(0, k);
        offs.push_back(axis == 0 ? t.rect.x_min : t.rect.y_min);
      }
      CHECK(offs.front() == 0.0);
      CHECK(offs.back() + tile >= len);
      for (int k = 0; k + 1 < n; ++k) {
        const double overlap = offs[k] + tile - offs[k + 1];
        CHECK(overlap >= need);
        CHECK(offs[k + 1] >= offs[k]);
      }
    }
  }
}

TEST_CASE("tile count per axis never drops as target NBA grows", "[tiling]") {
  const ImageDims dims(1920, 1080);
  const Nba i_nba(0.0009);
  const double extent = std::sqrt(i_nba.value * dims.area());
  int last_tile = std::numeric_limits<int>::max();
  std::size_t last_count = 0;
  for (double t : {0.002, 0.004, 0.008, 0.016, 0.032, 0.064}) {
    const int tile = compute_tile_size(dims, i_nba, Nba(t), 192);
    CHECK(tile <= last_tile);
    const auto plan = plan_tiles("m", dims, tile, extent, 192, 1 << 16);
    CHECK(plan.tile_count() >= last_count);
    last_tile = tile;
    last_count = plan.tile_count();
  }
}

TEST_CASE("coordinate transforms", "[tiling]") {
  auto plan = plan_tiles("t", ImageDims(1000, 1000), 384, 60, 192);
  // Find the tile offsets we need for the worked examples by building a
  // custom plan: offsets (100, 200), tile 384, input 192.
  TilePlan custom;
  custom.image_id = "c";
  custom.dims = ImageDims(1000, 1000);
  custom.tile_size = 384;
  custom.input_resolution = 192;
  custom.grid_x = 1;
  custom.grid_y = 1;
  custom.tiles.push_back({0, 0, BBox(100, 200, 484, 584)});

  const BBox mapped = tile_to_global(custom, 0, 0, BBox(0, 0, 8, 8));
  CHECK(mapped == BBox(100, 200, 116, 216));
  const BBox back = global_to_tile(custom, 0, 0, mapped);
  CHECK(back == BBox(0, 0, 8, 8));

  SECTION("identity when tile matches input and offset is zero") {
    TilePlan ident = custom;
    ident.tile_size = 192;
    ident.tiles[0].rect = BBox(0, 0, 192, 192);
    const BBox b(13.5, 2.25, 100.75, 180.0);
    CHECK(tile_to_global(ident, 0, 0, b) == b);
  }

  SECTION("point through offset (300, 0), tile 400, input 200") {
    TilePlan p = custom;
    p.tile_size = 400;
    p.input_resolution = 200;
    p.tiles[0].rect = BBox(300, 0, 700, 400);
    const BBox pt = tile_to_global(p, 0, 0, BBox(100, 50, 100, 50));
    CHECK(pt == BBox(500, 100, 500, 100));
  }

  SECTION("unknown tile index") {
    CHECK_THROWS_AS(tile_to_global(custom, 5, 0, BBox(0, 0, 1, 1)), validation_error);
    CHECK_THROWS_AS(global_to_tile(custom, 0, -1, BBox(0, 0, 1, 1)), validation_error);
  }

  SECTION("round trip within 1e-6 relative") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
      const BBox b = testutil::random_box(rng, 192.0, 50.0);
      for (const auto& tile : plan.tiles) {
        const BBox g = tile_to_global(plan, tile.col, tile.row, b);
        const BBox r = global_to_tile(plan, tile.col, tile.row, g);
        CHECK(std::abs(r.x_min - b.x_min) <= 1e-6 * std::max(1.0, std::abs(b.x_min)));
        CHECK(std::abs(r.y_max - b.y_max) <= 1e-6 * std::max(1.0, std::abs(b.y_max)));
      }
    }
  }
}

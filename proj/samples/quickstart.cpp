// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

// Minimal end-to-end walk through the library: synthesize a scene, plan
// tiles, run the simulated detector, fuse cross-tile duplicates, score the
// result, and estimate on-device throughput.

#include <cstdio>

#include "tilekit/tilekit.hpp"

int main() {
  using namespace tilekit;

  SynthConfig synth;
  synth.dims = ImageDims(1280, 720);
  synth.num_images = 4;
  synth.min_count = 30;
  synth.max_count = 60;
  synth.min_extent = 24;
  synth.max_extent = 36;
  synth.seed = 7;
  const auto images = synth_generate(synth);

  const Nba target(0.008);  // 0.8% target object size after tiling
  const auto plans = plan_dataset(images, target, 192);

  SimDetectorConfig sim;  // perfect detector
  const auto predictions = simulate_dataset(images, plans, sim);

  FusionConfig fusion;  // one_way_ratio @ 0.8, keep the largest box
  const auto fused = fuse_dataset(plans, predictions, fusion);

  MatchConfig match;  // IoU @ 0.5
  const EvalReport report = evaluate_dataset(images, fused, match);

  double tiles = 0;
  for (const auto& p : plans) tiles += static_cast<double>(p.tile_count());
  tiles /= static_cast<double>(plans.size());

  DeviceProfile profile;
  profile.name = "tinyissimoyolo-gap9";
  profile.latency_per_tile = 0.0162;
  profile.energy_per_tile = 0.00127;
  const CostEstimate cost = estimate(tiles, profile);

  std::printf("images: %zu, avg tiles/image: %.1f\n", images.size(), tiles);
  std::printf("precision %.3f  recall %.3f  F1 %.3f  count MAE %.3f\n", report.precision,
              report.recall, report.f1, report.count_mae);
  std::printf("estimated %.1f ms/image (%.1f fps), %.2f mJ/image\n",
              cost.latency_per_image * 1e3, cost.fps, cost.energy_per_image * 1e3);
  return 0;
}

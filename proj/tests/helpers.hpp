// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "tilekit/geometry.hpp"

namespace testutil {

/// Scratch directory under the system temp root, wiped on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("tilekit_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Random positive-area box inside [0, span]^2. Test-only generator, kept
/// independent of the library RNG.
inline tilekit::BBox random_box(std::mt19937_64& rng, double span = 1000.0,
                                double max_extent = 200.0) {
  std::uniform_real_distribution<double> pos(0.0, span - 1.0);
  std::uniform_real_distribution<double> ext(1.0, max_extent);
  const double x = pos(rng), y = pos(rng);
  const double w = ext(rng), h = ext(rng);
  return tilekit::BBox(x, y, x + w, y + h);
}

}  // namespace testutil

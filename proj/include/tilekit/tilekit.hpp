// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file tilekit.hpp
 * @brief Umbrella header: adaptive tiling, cross-tile fusion, evaluation,
 *        and on-device cost estimation for small-object detection.
 */

#pragma once

#include "tilekit/cost.hpp"
#include "tilekit/dataset.hpp"
#include "tilekit/detector.hpp"
#include "tilekit/errors.hpp"
#include "tilekit/fusion.hpp"
#include "tilekit/geometry.hpp"
#include "tilekit/io.hpp"
#include "tilekit/metrics.hpp"
#include "tilekit/parallel.hpp"
#include "tilekit/pipeline.hpp"
#include "tilekit/ppm.hpp"
#include "tilekit/rng.hpp"
#include "tilekit/tiling.hpp"

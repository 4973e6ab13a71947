// Copyright (c) 2026 tilekit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tilekit {

/// Bad inputs: out-of-range values, malformed records, violated preconditions.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem trouble: missing files, unreadable paths, failed writes.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tilekit

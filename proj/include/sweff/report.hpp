// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sweff/experiment.hpp"

namespace sweff {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Writes tables, results.json, figure series and manifest.json into
/// `dir` (created if needed). File contents depend only on the report, so
/// re-running a config yields byte-identical files. Returns the file names
/// written, relative to `dir`.
std::vector<std::string> emit_reports(const RunReport& report, const std::string& dir);

/// Fresh run directory under `root` named by config hash and a UTC
/// timestamp; a numeric suffix keeps earlier runs untouched.
std::string make_run_directory(const std::string& root, const ExperimentConfig& cfg);

}  // namespace sweff

// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sweff/metrics.hpp"
#include "sweff/topology.hpp"
#include "sweff/workload.hpp"

namespace sweff {

enum class ArchSelection { Torus, Rail, Both };
enum class ModelSelection { Dense, MoE, Both };
enum class SweepAxis { None, TieredRatio, ServerSize, INC, ClusterScale };

std::string_view to_string(ArchSelection a);
std::string_view to_string(ModelSelection m);
std::string_view to_string(SweepAxis s);

ArchSelection parse_arch(std::string_view s);
ModelSelection parse_model(std::string_view s);
SweepAxis parse_sweep(std::string_view s);
Weighting parse_weighting(std::string_view s);

struct ExperimentConfig {
  int cluster_size = 4096;
  ArchSelection arch = ArchSelection::Both;
  ModelSelection models = ModelSelection::Both;
  SweepAxis sweep = SweepAxis::None;
  std::vector<double> sweep_values;  // empty: the axis default range
  std::vector<int> plane_counts{1, 2, 4, 8};
  Weighting weighting = Weighting::Duration;
  bool inc = false;
  std::string out_dir = "results";
  int jobs = 0;  // 0: one per hardware thread

  TorusParams torus;
  RailParams rail;
  EnumerationConstraints constraints;
  ScalingCoefficients coefficients;
};

/// Values swept when the config does not list them.
std::vector<double> default_sweep_values(SweepAxis axis);

/// The sweep values in effect for a config.
std::vector<double> effective_sweep_values(const ExperimentConfig& cfg);

/// Parses a JSON config on top of `base`. Unknown keys and bad values throw
/// ConfigError.
ExperimentConfig parse_config(std::string_view json_text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Throws ConfigError when the config cannot describe a run.
void validate_config(const ExperimentConfig& cfg);

/// Canonical JSON with every default filled in.
std::string config_to_json(const ExperimentConfig& cfg);

/// Stable 64-bit FNV-1a hash of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace sweff

// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sweff/config.hpp"
#include "sweff/flow_engine.hpp"
#include "sweff/metrics.hpp"
#include "sweff/topology.hpp"
#include "sweff/workload.hpp"

namespace sweff {

struct WorkloadResult {
  ParallelismConfig config;
  bool ok = false;
  std::string error;
  MetricsRecord metrics;
  std::vector<PhaseTiming> phases;

  std::string id() const { return config.id(); }
};

/// One architecture evaluated on one model suite at one sweep point.
struct SuiteResult {
  std::string experiment;  // "dissect" or the sweep axis name
  ArchKind arch = ArchKind::Torus3D;
  ModelKind model = ModelKind::Dense;
  int cluster_size = 0;
  double sweep_value = 0.0;
  int planes = 1;
  std::string variant;  // label that tells series apart, e.g. "rail-p8"
  std::string error;    // set when the point could not be built at all
  std::vector<WorkloadResult> workloads;
  std::optional<AggregatedMetrics> aggregate;

  int failed_workloads() const;
};

struct RunReport {
  ExperimentConfig config;
  std::string command;  // "dissect" or "sweep"
  std::vector<SuiteResult> suites;

  int failures() const;
};

/// Description of one suite evaluation.
struct SuitePoint {
  std::string experiment;
  ArchKind arch = ArchKind::Torus3D;
  ModelKind model = ModelKind::Dense;
  int cluster_size = 0;
  double sweep_value = 0.0;
  std::string variant;
  TorusParams torus;
  RailParams rail;
  double torus_ratio = 1.0;  // tiered ratio on the workload's dominant axis
  bool inc = false;
};

/// Evaluates one workload on the architecture described by `point`.
WorkloadResult evaluate_config(const SuitePoint& point, const ParallelismConfig& cfg,
                               const ExperimentConfig& ec);

/// Evaluates several suite points with a worker pool. Results keep the order
/// of `points` and of each suite's enumeration, whatever the completion order.
std::vector<SuiteResult> evaluate_points(const std::vector<SuitePoint>& points,
                                         const ExperimentConfig& ec);

RunReport run_dissection(const ExperimentConfig& cfg);
RunReport run_sweep(const ExperimentConfig& cfg);

/// Aggregate over the successful workloads of a suite, if any.
std::optional<AggregatedMetrics> aggregate_suite(const std::vector<WorkloadResult>& workloads,
                                                 Weighting weighting);

}  // namespace sweff

// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "sweff/flow_engine.hpp"
#include "sweff/topology.hpp"
#include "sweff/traffic.hpp"

namespace sweff {

/// One closed-form bottleneck check: a metric measured by routing a small
/// traffic pattern end to end, against its analytic value.
struct OracleCheck {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 1e-12;  // relative, or absolute when expected is 0
  bool at_least = false;     // pass when actual >= expected - tolerance

  bool pass() const;
};

/// Evaluates one phase made of the given primitives on a topology.
WorkloadEvaluation evaluate_primitives(const Topology& topology,
                                       const std::vector<PrimitiveInstance>& primitives);

/// Data-, routing- and port-utilization bottleneck examples.
std::vector<OracleCheck> run_oracle_suite();

}  // namespace sweff

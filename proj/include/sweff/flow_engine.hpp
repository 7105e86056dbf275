// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sweff/metrics.hpp"
#include "sweff/topology.hpp"
#include "sweff/traffic.hpp"

namespace sweff {

/// One equal-cost path and the share of the pair's bytes it carries.
struct PathShare {
  std::vector<PortId> ports;  // egress ports in traversal order, endpoint ports included
  double weight = 0.0;
};

struct RouteTable {
  std::map<std::pair<GpuId, GpuId>, std::vector<PathShare>> routes;
};

/// Shortest-path ECMP routes for one pair. On a rail fabric the paths are
/// enumerated explicitly; use only on small topologies.
std::vector<PathShare> route_pair(const Topology& topology, GpuId src, GpuId dst,
                                  TorusDirection direction = TorusDirection::Minimal);

/// Routes for every explicit flow class of a flow set.
RouteTable build_route_table(const Topology& topology, const FlowSet& flows);

/// Bytes per port (indexed by PortId, endpoint ports included) and bytes
/// received per GPU.
struct TrafficAccount {
  std::vector<Bytes> port_bytes;
  std::vector<Bytes> gpu_received;

  explicit TrafficAccount(const Topology& topology);
};

struct RouteOptions {
  // Closed-form per-port totals for uniform exchanges where the placement
  // allows it; otherwise every ordered pair is routed.
  bool analytic_exchange = true;
};

void route_flows(const Topology& topology, const FlowSet& flows, TrafficAccount& account,
                 const RouteOptions& options = {});
TrafficAccount route_flows(const Topology& topology, const FlowSet& flows,
                           const RouteOptions& options = {});

/// Bottleneck time of one phase: max over ports of bytes / rate.
Seconds phase_duration(const Topology& topology, std::span<const Bytes> port_bytes);

struct PhaseTiming {
  PhaseTag tag = PhaseTag::TP;
  Seconds duration = 0.0;
  Bytes effective_bytes = 0.0;
  Bytes received_bytes = 0.0;
  Bytes forwarded_bytes = 0.0;
};

struct WorkloadEvaluation {
  PortLedger ledger;  // inventory ports only
  MetricsRecord metrics;
  std::vector<PhaseTiming> phases;
};

WorkloadEvaluation evaluate_workload(const Topology& topology, const std::vector<Phase>& schedule,
                                     const RouteOptions& options = {});

struct ExchangeAggregate {
  std::vector<Bytes> port_bytes;
  std::vector<Bytes> gpu_received;
  int pairwise_groups = 0;  // groups that needed the pairwise fallback
};

/// Per-port totals of a uniform all-to-all over each group, where every
/// ordered pair carries k_r * D / n bytes. Torus groups must form one whole
/// ring along an axis; other torus groups fall back to pairwise routing.
ExchangeAggregate aggregate_a2a_analytically(const std::vector<std::vector<GpuId>>& groups,
                                             const Topology& topology, Bytes D,
                                             std::int64_t k_r,
                                             TorusDirection direction = TorusDirection::Positive);

/// Columnar text export of a ledger and its phase timings.
void write_ledger(std::ostream& os, const Topology& topology, const WorkloadEvaluation& eval);

}  // namespace sweff

// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sweff/types.hpp"

namespace sweff {

enum class PrimitiveKind {
  PointToPoint,
  AllGather,
  ReduceScatter,
  AllReduce,
  AllToAllDispatch,
  AllToAllCombine,
};

std::string_view to_string(PrimitiveKind kind);

/// Effective (computationally usable) bytes produced by one primitive.
///
/// For PointToPoint, `participants` counts receiving endpoints, so a phase of
/// three pairs moving D each yields 3·D. Collective kinds over a single
/// participant produce no traffic and return 0. `routed_experts` is only
/// read for AllToAllDispatch.
Bytes effective_volume(PrimitiveKind kind, std::int64_t participants,
                       Bytes tensor_size, std::int64_t routed_experts = 1);

/// Per-port and per-GPU byte totals for one observation window.
///
/// Only ports in the switching inventory appear here; endpoint NIC ports
/// that do not forward are accounted for by the flow engine but excluded.
struct PortLedger {
  std::vector<Bytes> port_bytes;  // integral of the forwarding rate per port
  std::vector<Rate> port_rate;
  std::vector<Bytes> gpu_received;
  Seconds duration = 0.0;

  Bytes forwarded_total() const;
  Bytes received_total() const;
  Rate capacity_total() const;
  Rate active_capacity() const;
};

/// Effective bytes per received byte. Both zero is the vacuous no-traffic
/// case and yields 1.
double data_efficiency(Bytes effective_bytes, Bytes received_bytes);

/// Redundant received bytes per effective byte, derived from gamma.
double redundancy_ratio(double gamma);

/// Received bytes per forwarded byte, i.e. 1 / mean forwarding count.
double routing_efficiency(Bytes received_bytes, Bytes forwarded_bytes);

struct PortUtilization {
  double theta = 0.0;
  double spatial = 0.0;
  double temporal = 0.0;
};

PortUtilization port_utilization(const PortLedger& ledger);

struct MetricsRecord {
  double gamma = 1.0;
  double delta = 1.0;
  double theta = 0.0;
  double theta_spatial = 0.0;
  double theta_temporal = 0.0;
  double mu = 0.0;
  double eta = 0.0;
  Bytes effective_bytes = 0.0;
  Bytes received_bytes = 0.0;
  Bytes forwarded_bytes = 0.0;
  Rate capacity = 0.0;         // total provisioned switching rate
  Rate active_capacity = 0.0;  // rate of ports that forwarded anything
  Seconds duration = 0.0;
};

MetricsRecord compose_metrics(Bytes effective_bytes, Bytes received_bytes,
                              const PortLedger& ledger);

enum class Weighting { Duration, Equal };

std::string_view to_string(Weighting w);

struct WorkloadWeight {
  std::string workload_id;
  double lambda = 0.0;
  Seconds duration = 0.0;
};

/// Suite-level metrics. The barred ratios are pooled (ratio of sums);
/// `eta_bar_weighted` is the lambda-weighted sum of per-workload eta and is
/// kept alongside so both forms can be compared.
struct AggregatedMetrics {
  std::vector<WorkloadWeight> weights;
  std::vector<MetricsRecord> records;
  double eta_bar = 0.0;
  double eta_bar_weighted = 0.0;
  double gamma_bar = 1.0;
  double delta_bar = 1.0;
  double theta_bar = 0.0;
  double theta_spatial_bar = 0.0;
  double theta_temporal_bar = 0.0;
  double mu_bar = 0.0;
  Bytes effective_bytes = 0.0;
  Bytes received_bytes = 0.0;
  Bytes forwarded_bytes = 0.0;
  double capacity_time = 0.0;
  Seconds total_duration = 0.0;
};

/// Duration weighting pools raw ledgers (sequential workloads over one
/// window). Equal weighting first normalizes every workload to unit
/// duration, so each contributes the same share of capacity-time.
AggregatedMetrics aggregate_metrics(std::span<const MetricsRecord> records,
                                    std::span<const std::string> ids = {},
                                    Weighting weighting = Weighting::Duration);

}  // namespace sweff

// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include "sweff/metrics.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace sweff {

namespace {

// Relative slack for floating comparisons against capacity bounds.
constexpr double kFeasibilitySlack = 1e-9;

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::PointToPoint: return "p2p";
    case PrimitiveKind::AllGather: return "all-gather";
    case PrimitiveKind::ReduceScatter: return "reduce-scatter";
    case PrimitiveKind::AllReduce: return "all-reduce";
    case PrimitiveKind::AllToAllDispatch: return "a2a-dispatch";
    case PrimitiveKind::AllToAllCombine: return "a2a-combine";
  }
  return "unknown";
}

std::string_view to_string(Weighting w) {
  return w == Weighting::Duration ? "duration" : "equal";
}

Bytes effective_volume(PrimitiveKind kind, std::int64_t participants,
                       Bytes tensor_size, std::int64_t routed_experts) {
  if (participants < 1) {
    throw DomainError("effective_volume: participants must be >= 1");
  }
  if (!(tensor_size > 0.0)) {
    throw DomainError("effective_volume: tensor size must be positive");
  }
  const auto n = static_cast<double>(participants);
  switch (kind) {
    case PrimitiveKind::PointToPoint:
      return n * tensor_size;
    case PrimitiveKind::AllGather:
      return participants == 1 ? 0.0 : n * (tensor_size / n) * (n - 1.0);
    case PrimitiveKind::ReduceScatter:
      return participants == 1 ? 0.0 : n * (tensor_size / n);
    case PrimitiveKind::AllReduce:
      return participants == 1 ? 0.0 : n * tensor_size;
    case PrimitiveKind::AllToAllDispatch:
      if (routed_experts < 1) {
        throw DomainError("effective_volume: dispatch needs routed_experts >= 1");
      }
      return participants == 1
                 ? 0.0
                 : n * (tensor_size / n) * (n - 1.0) * static_cast<double>(routed_experts);
    case PrimitiveKind::AllToAllCombine:
      return participants == 1 ? 0.0 : n * (tensor_size / n) * (n - 1.0);
  }
  throw DomainError("effective_volume: unknown primitive kind");
}

Bytes PortLedger::forwarded_total() const {
  return std::accumulate(port_bytes.begin(), port_bytes.end(), 0.0);
}

Bytes PortLedger::received_total() const {
  return std::accumulate(gpu_received.begin(), gpu_received.end(), 0.0);
}

Rate PortLedger::capacity_total() const {
  return std::accumulate(port_rate.begin(), port_rate.end(), 0.0);
}

Rate PortLedger::active_capacity() const {
  Rate sum = 0.0;
  for (std::size_t p = 0; p < port_bytes.size(); ++p) {
    if (port_bytes[p] > 0.0) sum += port_rate[p];
  }
  return sum;
}

double data_efficiency(Bytes effective_bytes, Bytes received_bytes) {
  if (effective_bytes < 0.0 || received_bytes < 0.0) {
    throw LedgerError("data_efficiency: negative byte count");
  }
  if (received_bytes == 0.0) {
    if (effective_bytes == 0.0) return 1.0;
    throw LedgerError("data_efficiency: effective bytes without any received bytes");
  }
  return effective_bytes / received_bytes;
}

double redundancy_ratio(double gamma) {
  if (!(gamma > 0.0)) throw DomainError("redundancy_ratio: gamma must be positive");
  return 1.0 / gamma - 1.0;
}

double routing_efficiency(Bytes received_bytes, Bytes forwarded_bytes) {
  if (received_bytes < 0.0 || forwarded_bytes < 0.0) {
    throw LedgerError("routing_efficiency: negative byte count");
  }
  if (received_bytes == 0.0 && forwarded_bytes == 0.0) return 1.0;
  if (forwarded_bytes < received_bytes * (1.0 - kFeasibilitySlack)) {
    throw LedgerError("routing_efficiency: forwarded bytes below received bytes "
                      "(flow conservation violated)");
  }
  return received_bytes / forwarded_bytes;
}

PortUtilization port_utilization(const PortLedger& ledger) {
  if (ledger.port_bytes.size() != ledger.port_rate.size()) {
    throw LedgerError("port_utilization: bytes/rate size mismatch");
  }
  Rate total = 0.0;
  Rate active = 0.0;
  Bytes forwarded = 0.0;
  for (std::size_t p = 0; p < ledger.port_bytes.size(); ++p) {
    const Rate rate = ledger.port_rate[p];
    const Bytes bytes = ledger.port_bytes[p];
    if (!(rate > 0.0)) throw LedgerError("port_utilization: non-positive port rate");
    if (bytes < 0.0) throw LedgerError("port_utilization: negative port bytes");
    if (bytes > rate * ledger.duration * (1.0 + kFeasibilitySlack)) {
      std::ostringstream os;
      os << "port_utilization: port " << p << " forwarded " << bytes
         << " B, exceeding capacity x duration " << rate * ledger.duration;
      throw LedgerError(os.str());
    }
    total += rate;
    if (bytes > 0.0) {
      active += rate;
      forwarded += bytes;
    }
  }
  PortUtilization u;
  if (forwarded == 0.0) return u;
  if (!(ledger.duration > 0.0)) {
    throw LedgerError("port_utilization: traffic with non-positive duration");
  }
  u.theta = forwarded / (ledger.duration * total);
  u.spatial = active / total;
  u.temporal = forwarded / (ledger.duration * active);
  return u;
}

MetricsRecord compose_metrics(Bytes effective_bytes, Bytes received_bytes,
                              const PortLedger& ledger) {
  MetricsRecord r;
  const auto util = port_utilization(ledger);
  r.effective_bytes = effective_bytes;
  r.received_bytes = received_bytes;
  r.forwarded_bytes = ledger.forwarded_total();
  r.capacity = ledger.capacity_total();
  r.active_capacity = ledger.active_capacity();
  r.duration = ledger.duration;
  r.gamma = data_efficiency(effective_bytes, received_bytes);
  r.delta = routing_efficiency(received_bytes, r.forwarded_bytes);
  r.theta = util.theta;
  r.theta_spatial = util.spatial;
  r.theta_temporal = util.temporal;
  r.mu = safe_ratio(received_bytes, r.capacity * r.duration);
  r.eta = safe_ratio(effective_bytes, r.capacity * r.duration);
  return r;
}

AggregatedMetrics aggregate_metrics(std::span<const MetricsRecord> records,
                                    std::span<const std::string> ids,
                                    Weighting weighting) {
  if (records.empty()) throw DomainError("aggregate_metrics: no records");
  if (!ids.empty() && ids.size() != records.size()) {
    throw DomainError("aggregate_metrics: id count does not match record count");
  }
  AggregatedMetrics agg;
  agg.records.assign(records.begin(), records.end());

  Seconds total_time = 0.0;
  for (const auto& r : records) {
    if (!(r.duration > 0.0)) {
      throw DomainError("aggregate_metrics: every workload needs a positive duration");
    }
    total_time += r.duration;
  }
  agg.total_duration = total_time;

  const double k = static_cast<double>(records.size());
  double active_time = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    // Scale turns each ledger into its contribution to the pooled window.
    const double scale = weighting == Weighting::Duration ? 1.0 : 1.0 / r.duration;
    const double lambda = weighting == Weighting::Duration ? r.duration / total_time : 1.0 / k;
    agg.weights.push_back({ids.empty() ? std::to_string(i) : ids[i], lambda, r.duration});
    agg.effective_bytes += r.effective_bytes * scale;
    agg.received_bytes += r.received_bytes * scale;
    agg.forwarded_bytes += r.forwarded_bytes * scale;
    agg.capacity_time += r.capacity * r.duration * scale;
    active_time += r.active_capacity * r.duration * scale;
    agg.eta_bar_weighted += lambda * r.eta;
  }

  agg.gamma_bar = data_efficiency(agg.effective_bytes, agg.received_bytes);
  agg.delta_bar = routing_efficiency(agg.received_bytes, agg.forwarded_bytes);
  agg.theta_bar = safe_ratio(agg.forwarded_bytes, agg.capacity_time);
  agg.theta_spatial_bar = safe_ratio(active_time, agg.capacity_time);
  agg.theta_temporal_bar = safe_ratio(agg.forwarded_bytes, active_time);
  agg.mu_bar = safe_ratio(agg.received_bytes, agg.capacity_time);
  agg.eta_bar = safe_ratio(agg.effective_bytes, agg.capacity_time);
  return agg;
}

}  // namespace sweff

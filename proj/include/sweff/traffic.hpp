// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "sweff/metrics.hpp"
#include "sweff/topology.hpp"
#include "sweff/types.hpp"
#include "sweff/workload.hpp"

namespace sweff {

enum class PhaseTag { TP, PP, DP, EPDispatch, EPCombine, EDP };

std::string_view to_string(PhaseTag t);

struct PrimitiveInstance {
  PrimitiveKind kind = PrimitiveKind::AllReduce;
  std::vector<GpuId> group;
  Bytes tensor_size = 0.0;
  std::int64_t routed_experts = 1;
  std::int64_t repeat = 1;  // identical back-to-back instances (microbatches)
  PhaseTag tag = PhaseTag::TP;

  Bytes effective_bytes() const;
};

/// `multiplicity` identical flows of `volume` bytes from src to dst.
struct FlowClass {
  GpuId src = 0;
  GpuId dst = 0;
  Bytes volume = 0.0;
  std::int64_t multiplicity = 1;

  Bytes total() const { return volume * static_cast<double>(multiplicity); }
};

/// Uniform all-to-all: every ordered pair of distinct members carries
/// `pair_volume` bytes. Kept in this compact form so large groups never
/// materialize n^2 classes.
struct UniformExchange {
  std::vector<GpuId> group;
  Bytes pair_volume = 0.0;
};

/// In-switch reduction: every member uploads `volume` to `reducer`, which
/// returns `volume` of reduced data to every member.
struct ReductionGroup {
  std::vector<GpuId> group;
  NodeId reducer = 0;
  Bytes volume = 0.0;
};

/// How flows choose a direction on a torus ring. Minimal takes the shorter
/// way round and splits evenly at exactly half the ring; Positive always
/// travels in the + direction.
enum class TorusDirection { Minimal, Positive };

struct FlowSet {
  std::vector<FlowClass> classes;
  std::vector<UniformExchange> exchanges;
  std::vector<ReductionGroup> reductions;
  TorusDirection torus_direction = TorusDirection::Minimal;

  bool reduction_at_switch() const { return !reductions.empty(); }
  bool empty() const { return classes.empty() && exchanges.empty() && reductions.empty(); }
  Bytes sent_total() const;
  Bytes received_total() const;
  void append(const FlowSet& other);
};

struct Phase {
  PhaseTag tag = PhaseTag::TP;
  std::vector<PrimitiveInstance> primitives;
  FlowSet flows;

  Bytes effective_bytes() const;
};

/// Ring collective in both directions: each member sends half of its ring
/// volume to its successor and half to its predecessor. A two-member ring
/// collapses to one flow each way.
FlowSet expand_ring_collective(PrimitiveKind kind, const std::vector<GpuId>& group, Bytes D);

FlowSet expand_p2p(GpuId src, GpuId dst, Bytes D, std::int64_t multiplicity = 1);

/// Uniform all-to-all. Dispatch and combine carry the same wire volume,
/// k_r * D / n per ordered pair.
FlowSet expand_a2a(const std::vector<GpuId>& group, Bytes D, std::int64_t k_r,
                   PrimitiveKind direction);

/// Same traffic as expand_a2a, as explicit per-pair flow classes.
FlowSet expand_a2a_pairwise(const std::vector<GpuId>& group, Bytes D, std::int64_t k_r);

/// Replaces ring all-reduce flows of a TP phase with in-switch reduction for
/// every group that sits under one intra-server switch. Other groups keep
/// their ring flows.
Phase apply_inc_transform(const Phase& phase, const Topology& topology);

struct ScheduleOptions {
  bool inc = false;
};

/// Sequential phases of one training iteration.
std::vector<Phase> build_iteration_schedule(const WorkloadSpec& workload,
                                            const GroupLayout& layout,
                                            const Topology& topology,
                                            const ScheduleOptions& options = {});

/// Text dump: one line per flow class and per compact exchange/reduction.
void write_flows(std::ostream& os, const std::vector<Phase>& phases);

}  // namespace sweff

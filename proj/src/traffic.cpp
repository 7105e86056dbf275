// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include "sweff/traffic.hpp"

#include <ostream>
#include <string>

namespace sweff {

std::string_view to_string(PhaseTag t) {
  switch (t) {
    case PhaseTag::TP: return "tp";
    case PhaseTag::PP: return "pp";
    case PhaseTag::DP: return "dp";
    case PhaseTag::EPDispatch: return "ep-dispatch";
    case PhaseTag::EPCombine: return "ep-combine";
    case PhaseTag::EDP: return "edp";
  }
  return "?";
}

Bytes PrimitiveInstance::effective_bytes() const {
  // A point-to-point instance is one sender/receiver pair.
  const std::int64_t n =
      kind == PrimitiveKind::PointToPoint ? 1 : static_cast<std::int64_t>(group.size());
  return static_cast<double>(repeat) * effective_volume(kind, n, tensor_size, routed_experts);
}

Bytes FlowSet::sent_total() const {
  Bytes s = 0.0;
  for (const auto& c : classes) s += c.total();
  for (const auto& x : exchanges) {
    const double n = static_cast<double>(x.group.size());
    s += n * (n - 1.0) * x.pair_volume;
  }
  for (const auto& r : reductions) s += static_cast<double>(r.group.size()) * r.volume;
  return s;
}

Bytes FlowSet::received_total() const {
  // Reductions deliver as much as they collect; the others are lossless.
  return sent_total();
}

void FlowSet::append(const FlowSet& other) {
  if (empty()) torus_direction = other.torus_direction;
  classes.insert(classes.end(), other.classes.begin(), other.classes.end());
  exchanges.insert(exchanges.end(), other.exchanges.begin(), other.exchanges.end());
  reductions.insert(reductions.end(), other.reductions.begin(), other.reductions.end());
}

Bytes Phase::effective_bytes() const {
  Bytes s = 0.0;
  for (const auto& p : primitives) s += p.effective_bytes();
  return s;
}

FlowSet expand_ring_collective(PrimitiveKind kind, const std::vector<GpuId>& group, Bytes D) {
  FlowSet fs;
  const std::size_t n = group.size();
  if (n < 2) return fs;
  double steps = 0.0;
  switch (kind) {
    case PrimitiveKind::AllGather:
    case PrimitiveKind::ReduceScatter:
      steps = static_cast<double>(n - 1);
      break;
    case PrimitiveKind::AllReduce:
      steps = 2.0 * static_cast<double>(n - 1);
      break;
    default:
      throw DomainError("expand_ring_collective: not a ring collective: " +
                        std::string(to_string(kind)));
  }
  if (!(D > 0.0)) throw DomainError("expand_ring_collective: tensor size must be positive");
  const Bytes per_gpu = steps * D / static_cast<double>(n);
  if (n == 2) {
    fs.classes.push_back({group[0], group[1], per_gpu, 1});
    fs.classes.push_back({group[1], group[0], per_gpu, 1});
    return fs;
  }
  fs.classes.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    fs.classes.push_back({group[i], group[(i + 1) % n], per_gpu / 2.0, 1});
    fs.classes.push_back({group[i], group[(i + n - 1) % n], per_gpu / 2.0, 1});
  }
  return fs;
}

FlowSet expand_p2p(GpuId src, GpuId dst, Bytes D, std::int64_t multiplicity) {
  if (src == dst) throw DomainError("expand_p2p: source equals destination");
  if (!(D > 0.0) || multiplicity < 1) throw DomainError("expand_p2p: empty transfer");
  FlowSet fs;
  fs.classes.push_back({src, dst, D, multiplicity});
  return fs;
}

namespace {

void check_a2a(const std::vector<GpuId>& group, Bytes D, std::int64_t k_r) {
  if (!(D > 0.0)) throw DomainError("expand_a2a: tensor size must be positive");
  if (k_r < 1) throw DomainError("expand_a2a: routed experts must be >= 1");
  (void)group;
}

}  // namespace

FlowSet expand_a2a(const std::vector<GpuId>& group, Bytes D, std::int64_t k_r,
                   PrimitiveKind direction) {
  if (direction != PrimitiveKind::AllToAllDispatch &&
      direction != PrimitiveKind::AllToAllCombine) {
    throw DomainError("expand_a2a: direction must be dispatch or combine");
  }
  check_a2a(group, D, k_r);
  FlowSet fs;
  fs.torus_direction = TorusDirection::Positive;
  const std::size_t n = group.size();
  if (n < 2) return fs;
  fs.exchanges.push_back({group, static_cast<double>(k_r) * D / static_cast<double>(n)});
  return fs;
}

FlowSet expand_a2a_pairwise(const std::vector<GpuId>& group, Bytes D, std::int64_t k_r) {
  check_a2a(group, D, k_r);
  FlowSet fs;
  fs.torus_direction = TorusDirection::Positive;
  const std::size_t n = group.size();
  if (n < 2) return fs;
  const Bytes v = static_cast<double>(k_r) * D / static_cast<double>(n);
  fs.classes.reserve(n * (n - 1));
  for (GpuId s : group)
    for (GpuId d : group)
      if (s != d) fs.classes.push_back({s, d, v, 1});
  return fs;
}

namespace {

FlowSet expand_primitive(const PrimitiveInstance& p) {
  switch (p.kind) {
    case PrimitiveKind::PointToPoint:
      if (p.group.size() != 2) throw ScheduleError("p2p primitive needs exactly two members");
      return expand_p2p(p.group[0], p.group[1], p.tensor_size, p.repeat);
    case PrimitiveKind::AllGather:
    case PrimitiveKind::ReduceScatter:
    case PrimitiveKind::AllReduce: {
      FlowSet fs = expand_ring_collective(p.kind, p.group, p.tensor_size);
      for (auto& c : fs.classes) c.multiplicity *= p.repeat;
      return fs;
    }
    case PrimitiveKind::AllToAllDispatch:
    case PrimitiveKind::AllToAllCombine: {
      FlowSet fs = expand_a2a(p.group, p.tensor_size, p.routed_experts, p.kind);
      for (auto& x : fs.exchanges) x.pair_volume *= static_cast<double>(p.repeat);
      return fs;
    }
  }
  throw DomainError("unknown primitive kind");
}

Phase make_phase(PhaseTag tag, std::vector<PrimitiveInstance> prims) {
  Phase ph;
  ph.tag = tag;
  ph.primitives = std::move(prims);
  for (const auto& p : ph.primitives) ph.flows.append(expand_primitive(p));
  return ph;
}

}  // namespace

Phase apply_inc_transform(const Phase& phase, const Topology& topology) {
  if (phase.tag != PhaseTag::TP) {
    throw DomainError("INC applies to the TP phase only, not " + std::string(to_string(phase.tag)));
  }
  if (topology.is_torus()) return phase;  // no shared switch to reduce in
  Phase out;
  out.tag = phase.tag;
  out.primitives = phase.primitives;
  for (const auto& p : phase.primitives) {
    bool one_switch = p.kind == PrimitiveKind::AllReduce && p.group.size() >= 2;
    if (one_switch) {
      const int server = topology.rail.server_of(p.group.front());
      for (GpuId g : p.group) one_switch = one_switch && topology.rail.server_of(g) == server;
      if (one_switch) {
        out.flows.reductions.push_back(
            {p.group, topology.rail.intra_switch[server],
             p.tensor_size * static_cast<double>(p.repeat)});
        continue;
      }
    }
    out.flows.append(expand_primitive(p));
  }
  return out;
}

namespace {

void check_groups(const GroupLayout& layout, ParallelDim dim, int size, int n) {
  const auto& groups = layout.of(dim);
  long long covered = 0;
  for (const auto& g : groups) {
    if (static_cast<int>(g.size()) != size) {
      throw ScheduleError(std::string(to_string(dim)) + " group of size " +
                          std::to_string(g.size()) + ", expected " + std::to_string(size));
    }
    covered += static_cast<long long>(g.size());
  }
  if (covered != n) {
    throw ScheduleError(std::string(to_string(dim)) + " groups cover " + std::to_string(covered) +
                        " GPUs, expected " + std::to_string(n));
  }
}

std::vector<PrimitiveInstance> ring_prims(const GroupLayout& layout, ParallelDim dim, Bytes D,
                                          PhaseTag tag) {
  std::vector<PrimitiveInstance> out;
  for (const auto& g : layout.of(dim)) {
    PrimitiveInstance p;
    p.kind = PrimitiveKind::AllReduce;
    p.group = g;
    p.tensor_size = D;
    p.tag = tag;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PrimitiveInstance> pipeline_prims(const GroupLayout& layout, Bytes D, int m) {
  std::vector<PrimitiveInstance> out;
  for (const auto& chain : layout.of(ParallelDim::PP)) {
    for (std::size_t s = 0; s + 1 < chain.size(); ++s) {
      for (int dir = 0; dir < 2; ++dir) {
        PrimitiveInstance p;
        p.kind = PrimitiveKind::PointToPoint;
        p.group = dir == 0 ? std::vector<GpuId>{chain[s], chain[s + 1]}
                           : std::vector<GpuId>{chain[s + 1], chain[s]};
        p.tensor_size = D;
        p.repeat = m;
        p.tag = PhaseTag::PP;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Phase> build_iteration_schedule(const WorkloadSpec& w, const GroupLayout& layout,
                                            const Topology& topology,
                                            const ScheduleOptions& options) {
  const auto& c = w.config;
  const int n = c.cluster_size;
  if (topology.gpu_count != n) {
    throw ScheduleError("workload " + w.id() + " does not fit a " +
                        std::to_string(topology.gpu_count) + "-GPU topology");
  }
  std::vector<Phase> phases;
  if (c.model == ModelKind::Dense) {
    check_groups(layout, ParallelDim::TP, c.t, n);
    check_groups(layout, ParallelDim::PP, c.p, n);
    check_groups(layout, ParallelDim::DP, c.d, n);
    if (c.t >= 2) {
      Phase tp = make_phase(PhaseTag::TP,
                            ring_prims(layout, ParallelDim::TP, w.tp_activation_bytes, PhaseTag::TP));
      phases.push_back(options.inc ? apply_inc_transform(tp, topology) : std::move(tp));
    }
    if (c.p >= 2) {
      phases.push_back(
          make_phase(PhaseTag::PP, pipeline_prims(layout, w.pp_activation_bytes, w.microbatches)));
    }
    if (c.d >= 2) {
      phases.push_back(make_phase(
          PhaseTag::DP, ring_prims(layout, ParallelDim::DP, w.dp_gradient_bytes, PhaseTag::DP)));
    }
    return phases;
  }

  check_groups(layout, ParallelDim::EP, c.e, n);
  check_groups(layout, ParallelDim::PP, c.p, n);
  check_groups(layout, ParallelDim::EDP, c.d_e, n);
  check_groups(layout, ParallelDim::DP, c.d_attn, n);
  if (c.d_attn >= 2) {
    phases.push_back(make_phase(
        PhaseTag::DP, ring_prims(layout, ParallelDim::DP, w.dp_gradient_bytes, PhaseTag::DP)));
  }
  if (c.p >= 2) {
    phases.push_back(
        make_phase(PhaseTag::PP, pipeline_prims(layout, w.pp_activation_bytes, w.microbatches)));
  }
  if (c.e >= 2) {
    for (PrimitiveKind k : {PrimitiveKind::AllToAllDispatch, PrimitiveKind::AllToAllCombine}) {
      const PhaseTag tag =
          k == PrimitiveKind::AllToAllDispatch ? PhaseTag::EPDispatch : PhaseTag::EPCombine;
      std::vector<PrimitiveInstance> prims;
      for (const auto& g : layout.of(ParallelDim::EP)) {
        PrimitiveInstance p;
        p.kind = k;
        p.group = g;
        p.tensor_size = w.a2a_token_bytes;
        p.routed_experts = w.routed_experts;
        p.tag = tag;
        prims.push_back(std::move(p));
      }
      phases.push_back(make_phase(tag, std::move(prims)));
    }
  }
  if (c.d_e >= 2 && w.include_edp) {
    phases.push_back(make_phase(
        PhaseTag::EDP, ring_prims(layout, ParallelDim::EDP, w.edp_gradient_bytes, PhaseTag::EDP)));
  }
  return phases;
}

void write_flows(std::ostream& os, const std::vector<Phase>& phases) {
  const auto old = os.precision(17);
  os << "sweff-flows 1\n";
  for (const auto& ph : phases) {
    os << "phase " << to_string(ph.tag) << ' '
       << (ph.flows.torus_direction == TorusDirection::Positive ? "positive" : "minimal") << ' '
       << ph.effective_bytes() << '\n';
    for (const auto& c : ph.flows.classes) {
      os << "flow " << c.src << ' ' << c.dst << ' ' << c.volume << ' ' << c.multiplicity << '\n';
    }
    for (const auto& x : ph.flows.exchanges) {
      os << "exchange " << x.pair_volume << ' ' << x.group.size();
      for (GpuId g : x.group) os << ' ' << g;
      os << '\n';
    }
    for (const auto& r : ph.flows.reductions) {
      os << "reduce " << r.reducer << ' ' << r.volume << ' ' << r.group.size();
      for (GpuId g : r.group) os << ' ' << g;
      os << '\n';
    }
  }
  os.precision(old);
}

}  // namespace sweff

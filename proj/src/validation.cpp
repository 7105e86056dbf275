// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include "sweff/validation.hpp"

#include <cmath>
#include <numeric>

namespace sweff {

bool OracleCheck::pass() const {
  const double scale = expected == 0.0 ? 1.0 : std::abs(expected);
  if (at_least) return actual >= expected - tolerance * scale;
  return std::abs(actual - expected) <= tolerance * scale;
}

WorkloadEvaluation evaluate_primitives(const Topology& topology,
                                       const std::vector<PrimitiveInstance>& primitives) {
  Phase ph;
  ph.tag = primitives.empty() ? PhaseTag::TP : primitives.front().tag;
  ph.primitives = primitives;
  for (const auto& p : primitives) {
    switch (p.kind) {
      case PrimitiveKind::PointToPoint:
        ph.flows.append(expand_p2p(p.group.at(0), p.group.at(1), p.tensor_size, p.repeat));
        break;
      case PrimitiveKind::AllToAllDispatch:
      case PrimitiveKind::AllToAllCombine:
        ph.flows.append(expand_a2a(p.group, p.tensor_size, p.routed_experts, p.kind));
        break;
      default:
        ph.flows.append(expand_ring_collective(p.kind, p.group, p.tensor_size));
        break;
    }
  }
  return evaluate_workload(topology, {ph});
}

namespace {

PrimitiveInstance prim(PrimitiveKind k, std::vector<GpuId> group, Bytes D, std::int64_t k_r = 1,
                       PhaseTag tag = PhaseTag::TP) {
  PrimitiveInstance p;
  p.kind = k;
  p.group = std::move(group);
  p.tensor_size = D;
  p.routed_experts = k_r;
  p.tag = tag;
  return p;
}

std::vector<GpuId> iota_group(int n, GpuId first = 0) {
  std::vector<GpuId> g(static_cast<std::size_t>(n));
  std::iota(g.begin(), g.end(), first);
  return g;
}

// A small Clos: radix 4 gives two GPUs per leaf and, at 16 GPUs, two
// leaves per pod and four pods.
Topology small_clos(int gpus) {
  RailParams rp;
  rp.gpus_per_server = 2;
  rp.switch_radix = 4;
  return build_rail(gpus, rp);
}

}  // namespace

std::vector<OracleCheck> run_oracle_suite() {
  std::vector<OracleCheck> out;
  const Bytes D = 1 << 20;

  // Data efficiency on a single ring along X.
  for (int n = 2; n <= 8; ++n) {
    TorusParams tp;
    tp.dims = {n, 1, 1};
    const Topology t = build_torus(n, tp);
    const auto rs = evaluate_primitives(t, {prim(PrimitiveKind::ReduceScatter, iota_group(n), D)});
    out.push_back({"gamma reduce-scatter n=" + std::to_string(n), 1.0 / (n - 1),
                   rs.metrics.gamma});
    const auto ar = evaluate_primitives(t, {prim(PrimitiveKind::AllReduce, iota_group(n), D)});
    out.push_back({"gamma all-reduce n=" + std::to_string(n), n / (2.0 * (n - 1)),
                   ar.metrics.gamma});
    const auto ag = evaluate_primitives(t, {prim(PrimitiveKind::AllGather, iota_group(n), D)});
    out.push_back({"gamma all-gather n=" + std::to_string(n), 1.0, ag.metrics.gamma});
  }
  for (int k_r : {1, 2, 4, 8}) {
    const int n = 2 * k_r;
    TorusParams tp;
    tp.dims = {n, 1, 1};
    const Topology t = build_torus(n, tp);
    const auto comb = evaluate_primitives(
        t, {prim(PrimitiveKind::AllToAllCombine, iota_group(n), D, k_r, PhaseTag::EPCombine)});
    out.push_back({"gamma a2a-combine k_r=" + std::to_string(k_r), 1.0 / k_r,
                   comb.metrics.gamma});
    const auto disp = evaluate_primitives(
        t, {prim(PrimitiveKind::AllToAllDispatch, iota_group(n), D, k_r, PhaseTag::EPDispatch)});
    out.push_back({"gamma a2a-dispatch k_r=" + std::to_string(k_r), 1.0, disp.metrics.gamma});
    // One-dimension all-to-all travels n/2 = k_r hops on average.
    out.push_back({"delta torus a2a k_r=" + std::to_string(k_r), 1.0 / k_r, disp.metrics.delta});
  }

  // Routing efficiency on small Clos fabrics.
  {
    const Topology t = small_clos(8);  // two tiers, four leaves
    const auto intra = evaluate_primitives(t, {prim(PrimitiveKind::PointToPoint, {0, 1}, D)});
    out.push_back({"delta intra-server", 1.0, intra.metrics.delta});
    const auto same_leaf = evaluate_primitives(t, {prim(PrimitiveKind::PointToPoint, {0, 2}, D)});
    out.push_back({"delta same leaf", 1.0, same_leaf.metrics.delta});
    const auto lsl = evaluate_primitives(t, {prim(PrimitiveKind::PointToPoint, {0, 4}, D)});
    out.push_back({"delta leaf-spine-leaf", 1.0 / 3.0, lsl.metrics.delta});
  }
  {
    const Topology t = small_clos(16);  // three tiers
    const auto lscsl = evaluate_primitives(t, {prim(PrimitiveKind::PointToPoint, {0, 4}, D)});
    out.push_back({"delta leaf-spine-core-spine-leaf", 1.0 / 5.0, lscsl.metrics.delta});
  }
  {
    TorusParams tp;
    tp.dims = {4, 4, 4};
    const Topology t = build_torus(64, tp);
    const auto nb = evaluate_primitives(t, {prim(PrimitiveKind::PointToPoint, {0, 1}, D)});
    out.push_back({"delta torus neighbor", 1.0, nb.metrics.delta});
  }

  // Port utilization of one-axis phases on an 8x8x8 torus.
  {
    TorusParams tp;
    tp.dims = {8, 8, 8};
    const Topology t = build_torus(512, tp);
    std::vector<PrimitiveInstance> tp_rings, ep_groups;
    for (int r = 0; r < 64; ++r) {
      tp_rings.push_back(prim(PrimitiveKind::AllReduce, iota_group(8, r * 8), D));
      ep_groups.push_back(
          prim(PrimitiveKind::AllToAllDispatch, iota_group(8, r * 8), D, 4, PhaseTag::EPDispatch));
    }
    const auto tpe = evaluate_primitives(t, tp_rings);
    out.push_back({"theta_spatial torus TP phase", 2.0 / 6.0, tpe.metrics.theta_spatial});
    out.push_back({"theta_temporal torus TP phase", 0.99, tpe.metrics.theta_temporal, 1e-12, true});
    const auto epe = evaluate_primitives(t, ep_groups);
    out.push_back({"theta_spatial torus EP phase", 1.0 / 6.0, epe.metrics.theta_spatial});
    out.push_back({"theta_temporal torus EP phase", 0.99, epe.metrics.theta_temporal, 1e-12, true});
  }
  return out;
}

}  // namespace sweff

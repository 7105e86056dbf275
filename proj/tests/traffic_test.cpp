// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

#include "sweff/flow_engine.hpp"
#include "sweff/metrics.hpp"
#include "sweff/traffic.hpp"
#include "sweff/validation.hpp"
#include "sweff/workload.hpp"

namespace sweff {
namespace {

std::vector<GpuId> iota_group(int n, GpuId first = 0) {
  std::vector<GpuId> g(n);
  std::iota(g.begin(), g.end(), first);
  return g;
}

std::map<GpuId, Bytes> received_by(const FlowSet& f) {
  std::map<GpuId, Bytes> out;
  for (const auto& c : f.classes) out[c.dst] += c.total();
  return out;
}

double gamma_of(PrimitiveKind k, int n, Bytes d, const FlowSet& f, std::int64_t kr = 1) {
  return data_efficiency(effective_volume(k, n, d, kr), f.received_total());
}

TEST(Ring, AllReduceOfEight) {
  const Bytes d = 64e6;
  auto f = expand_ring_collective(PrimitiveKind::AllReduce, iota_group(8), d);
  for (const auto& [g, b] : received_by(f)) EXPECT_DOUBLE_EQ(b, 112e6) << g;
  EXPECT_DOUBLE_EQ(effective_volume(PrimitiveKind::AllReduce, 8, d), 8 * d);
  EXPECT_NEAR(gamma_of(PrimitiveKind::AllReduce, 8, d, f), 8.0 / 14.0, 1e-15);
  EXPECT_EQ(f.sent_total(), f.received_total());
}

TEST(Ring, AllGatherOfTwo) {
  auto f = expand_ring_collective(PrimitiveKind::AllGather, {0, 1}, 2.0);
  ASSERT_EQ(f.classes.size(), 2u);
  for (const auto& c : f.classes) {
    EXPECT_NE(c.src, c.dst);
    EXPECT_DOUBLE_EQ(c.total(), 1.0);
  }
  EXPECT_DOUBLE_EQ(f.received_total(), 2.0);
  EXPECT_DOUBLE_EQ(gamma_of(PrimitiveKind::AllGather, 2, 2.0, f), 1.0);
}

TEST(Ring, ReduceScatterOfFour) {
  auto f = expand_ring_collective(PrimitiveKind::ReduceScatter, iota_group(4), 4096.0);
  EXPECT_DOUBLE_EQ(f.received_total(), 12288.0);
  EXPECT_NEAR(gamma_of(PrimitiveKind::ReduceScatter, 4, 4096.0, f), 1.0 / 3.0, 1e-15);
}

TEST(Ring, ClosedFormGammaForManySizes) {
  for (int n = 2; n <= 33; ++n) {
    const Bytes d = 1e6;
    auto rs = expand_ring_collective(PrimitiveKind::ReduceScatter, iota_group(n), d);
    auto ar = expand_ring_collective(PrimitiveKind::AllReduce, iota_group(n), d);
    auto ag = expand_ring_collective(PrimitiveKind::AllGather, iota_group(n), d);
    EXPECT_NEAR(gamma_of(PrimitiveKind::ReduceScatter, n, d, rs), 1.0 / (n - 1), 1e-12);
    EXPECT_NEAR(gamma_of(PrimitiveKind::AllReduce, n, d, ar), n / (2.0 * (n - 1)), 1e-12);
    EXPECT_NEAR(gamma_of(PrimitiveKind::AllGather, n, d, ag), 1.0, 1e-12);
  }
}

TEST(Ring, OnlyNeighboursTalk) {
  std::vector<GpuId> g{5, 9, 2, 7, 11};
  auto f = expand_ring_collective(PrimitiveKind::AllReduce, g, 10.0);
  for (const auto& c : f.classes) {
    const auto i = std::find(g.begin(), g.end(), c.src) - g.begin();
    const auto j = std::find(g.begin(), g.end(), c.dst) - g.begin();
    const auto gap = (j - i + 5) % 5;
    EXPECT_TRUE(gap == 1 || gap == 4);
  }
}

TEST(Ring, SingleMemberIsEmpty) {
  EXPECT_TRUE(expand_ring_collective(PrimitiveKind::AllReduce, {3}, 10.0).empty());
  EXPECT_TRUE(expand_a2a({3}, 10.0, 1, PrimitiveKind::AllToAllDispatch).empty());
}

TEST(P2P, SingleFlow) {
  auto f = expand_p2p(0, 1, 1e6);
  ASSERT_EQ(f.classes.size(), 1u);
  EXPECT_DOUBLE_EQ(f.received_total(), 1e6);
  EXPECT_DOUBLE_EQ(gamma_of(PrimitiveKind::PointToPoint, 1, 1e6, f), 1.0);
}

TEST(P2P, ThreePairsCountEachDelivery) {
  Phase ph;
  ph.tag = PhaseTag::PP;
  for (auto [s, d] : std::vector<std::pair<int, int>>{{0, 1}, {2, 3}, {4, 5}}) {
    PrimitiveInstance p;
    p.kind = PrimitiveKind::PointToPoint;
    p.group = {s, d};
    p.tensor_size = 7.0;
    p.tag = PhaseTag::PP;
    ph.primitives.push_back(p);
  }
  EXPECT_DOUBLE_EQ(ph.effective_bytes(), 21.0);
}

TEST(A2A, DispatchOfThree) {
  const Bytes d = 300.0;
  for (auto f : {expand_a2a({0, 1, 2}, d, 2, PrimitiveKind::AllToAllDispatch),
                 expand_a2a_pairwise({0, 1, 2}, d, 2)}) {
    EXPECT_DOUBLE_EQ(f.received_total(), 4 * d);
    EXPECT_DOUBLE_EQ(gamma_of(PrimitiveKind::AllToAllDispatch, 3, d, f, 2), 1.0);
  }
}

TEST(A2A, CombineKeepsWireVolume) {
  for (std::int64_t kr : {1, 2, 4, 8}) {
    const int n = static_cast<int>(2 * kr);
    auto f = expand_a2a(iota_group(n), 1e6, kr, PrimitiveKind::AllToAllCombine);
    EXPECT_NEAR(gamma_of(PrimitiveKind::AllToAllCombine, n, 1e6, f, kr), 1.0 / kr, 1e-12);
  }
}

TEST(A2A, PairVolumesAreUniform) {
  auto f = expand_a2a_pairwise(iota_group(6), 600.0, 3);
  std::set<double> vols;
  std::set<std::pair<GpuId, GpuId>> pairs;
  for (const auto& c : f.classes) {
    vols.insert(c.total());
    pairs.insert({c.src, c.dst});
  }
  EXPECT_EQ(vols.size(), 1u);
  EXPECT_EQ(pairs.size(), 30u);
  auto two = expand_a2a_pairwise({0, 1}, 10.0, 1);
  for (const auto& c : two.classes) EXPECT_DOUBLE_EQ(c.total(), 5.0);
}

Phase tp_phase(const std::vector<std::vector<GpuId>>& groups, Bytes d) {
  Phase ph;
  ph.tag = PhaseTag::TP;
  for (const auto& g : groups) {
    PrimitiveInstance p;
    p.kind = PrimitiveKind::AllReduce;
    p.group = g;
    p.tensor_size = d;
    p.tag = PhaseTag::TP;
    ph.primitives.push_back(p);
    ph.flows.append(expand_ring_collective(p.kind, g, d));
  }
  return ph;
}

TEST(Inc, ServerGroupReducesInSwitch) {
  auto t = build_rail(16, {});
  const Bytes d = 8e6;
  auto inc = apply_inc_transform(tp_phase({iota_group(8)}, d), t);
  ASSERT_EQ(inc.flows.reductions.size(), 1u);
  auto acc = route_flows(t, inc.flows);
  for (GpuId g = 0; g < 8; ++g) EXPECT_DOUBLE_EQ(acc.gpu_received[g], d);
  Bytes at_switch = 0;
  for (GpuId g = 0; g < 8; ++g) at_switch += acc.port_bytes[t.rail.intra_to_gpu[g]];
  EXPECT_DOUBLE_EQ(at_switch, 8 * d);
  EXPECT_DOUBLE_EQ(data_efficiency(inc.effective_bytes(), inc.flows.received_total()), 1.0);
}

TEST(Inc, GroupAcrossServersStaysRing) {
  auto t = build_rail(16, {});
  auto base = tp_phase({{4, 5, 6, 7, 8, 9, 10, 11}}, 1e6);
  auto inc = apply_inc_transform(base, t);
  EXPECT_TRUE(inc.flows.reductions.empty());
  EXPECT_EQ(inc.flows.classes.size(), base.flows.classes.size());
  EXPECT_DOUBLE_EQ(inc.flows.received_total(), base.flows.received_total());
}

WorkloadSpec dense_spec(int n, int d, int p, int t) {
  return scale_workload({ModelKind::Dense, n, d, p, t, 1, 1, 1}, ReferenceModel::GPT3, {});
}

std::vector<PhaseTag> tags(const std::vector<Phase>& ps) {
  std::vector<PhaseTag> out;
  for (const auto& p : ps) out.push_back(p.tag);
  return out;
}

TEST(Schedule, DensePhases) {
  auto topo = std::make_shared<const Topology>(build_rail(2048, {}));
  auto w = dense_spec(2048, 64, 4, 8);
  EXPECT_EQ(w.layers, 48);
  auto pw = place_groups(w.config, topo);
  auto s = build_iteration_schedule(w, pw.layout, *pw.topology);
  EXPECT_EQ(tags(s), (std::vector<PhaseTag>{PhaseTag::TP, PhaseTag::PP, PhaseTag::DP}));
  // TP: one all-reduce of the folded activation per group.
  EXPECT_DOUBLE_EQ(s[0].effective_bytes(), 256 * 8 * w.tp_activation_bytes);
  for (const auto& ph : s) EXPECT_DOUBLE_EQ(ph.flows.sent_total(), ph.flows.received_total());
}

TEST(Schedule, PipelineChainCounts) {
  auto topo = std::make_shared<const Topology>(build_rail(1024, {}));
  auto w = dense_spec(1024, 16, 8, 8);
  auto pw = place_groups(w.config, topo);
  auto s = build_iteration_schedule(w, pw.layout, *pw.topology);
  const auto& pp = s[1];
  ASSERT_EQ(pp.tag, PhaseTag::PP);
  std::int64_t transfers = 0;
  for (const auto& c : pp.flows.classes) transfers += c.multiplicity;
  const std::int64_t chains = 1024 / 8;
  EXPECT_EQ(transfers, chains * 2 * w.microbatches * (8 - 1));
}

TEST(Schedule, NoTensorPhaseWithoutTensorParallelism) {
  auto topo = std::make_shared<const Topology>(build_rail(256, {}));
  auto w = dense_spec(256, 32, 8, 1);
  auto pw = place_groups(w.config, topo);
  auto s = build_iteration_schedule(w, pw.layout, *pw.topology);
  EXPECT_EQ(tags(s), (std::vector<PhaseTag>{PhaseTag::PP, PhaseTag::DP}));
}

TEST(Schedule, MoePhasesAndRoutedExperts) {
  auto topo = std::make_shared<const Topology>(build_rail(2048, {}));
  ParallelismConfig c{ModelKind::MoE, 2048, 1, 4, 1, 32, 16, 512};
  auto w = scale_workload(c, ReferenceModel::DeepSeekV3, {});
  auto pw = place_groups(c, topo);
  auto s = build_iteration_schedule(w, pw.layout, *pw.topology);
  EXPECT_EQ(tags(s), (std::vector<PhaseTag>{PhaseTag::DP, PhaseTag::PP, PhaseTag::EPDispatch,
                                            PhaseTag::EPCombine, PhaseTag::EDP}));
  EXPECT_EQ(s[2].primitives.front().routed_experts, 16);
  auto no_edp = w;
  no_edp.include_edp = false;
  EXPECT_EQ(build_iteration_schedule(no_edp, pw.layout, *pw.topology).size(), 4u);
}

TEST(Schedule, MismatchIsScheduleError) {
  auto topo = std::make_shared<const Topology>(build_rail(256, {}));
  auto w = dense_spec(256, 32, 4, 2);
  auto pw = place_groups(w.config, topo);
  auto other = dense_spec(256, 16, 4, 4);
  EXPECT_THROW(build_iteration_schedule(other, pw.layout, *pw.topology), ScheduleError);
  auto small = build_rail(128, {});
  EXPECT_THROW(build_iteration_schedule(w, pw.layout, small), ScheduleError);
}

TEST(Schedule, IncChangesOnlyTensorGamma) {
  auto topo = std::make_shared<const Topology>(build_rail(1024, {}));
  auto w = dense_spec(1024, 32, 4, 8);
  auto pw = place_groups(w.config, topo);
  auto base = build_iteration_schedule(w, pw.layout, *pw.topology);
  auto inc = build_iteration_schedule(w, pw.layout, *pw.topology, {true});
  ASSERT_EQ(base.size(), inc.size());
  auto eb = evaluate_workload(*pw.topology, base);
  auto ei = evaluate_workload(*pw.topology, inc);
  EXPECT_DOUBLE_EQ(ei.phases[0].received_bytes, ei.phases[0].effective_bytes);
  EXPECT_LT(eb.phases[0].received_bytes, eb.phases[0].forwarded_bytes + 1);
  EXPECT_GT(eb.phases[0].received_bytes, eb.phases[0].effective_bytes);
  for (std::size_t i = 1; i < base.size(); ++i) {
    EXPECT_DOUBLE_EQ(eb.phases[i].received_bytes, ei.phases[i].received_bytes);
    EXPECT_DOUBLE_EQ(eb.phases[i].forwarded_bytes, ei.phases[i].forwarded_bytes);
    EXPECT_DOUBLE_EQ(eb.phases[i].duration, ei.phases[i].duration);
  }
  // Intra-server TP forwards once per byte with or without INC.
  EXPECT_DOUBLE_EQ(ei.phases[0].forwarded_bytes, ei.phases[0].received_bytes);
  EXPECT_DOUBLE_EQ(eb.phases[0].forwarded_bytes, eb.phases[0].received_bytes);
}

TEST(Flows, DumpListsEveryClass) {
  auto topo = std::make_shared<const Topology>(build_rail(256, {}));
  auto w = dense_spec(256, 16, 2, 8);
  auto pw = place_groups(w.config, topo);
  auto s = build_iteration_schedule(w, pw.layout, *pw.topology);
  std::ostringstream os;
  write_flows(os, s);
  std::istringstream is(os.str());
  std::string first;
  std::getline(is, first);
  EXPECT_EQ(first, "sweff-flows 1");
  std::size_t flows = 0, phases = 0, expect = 0;
  for (const auto& ph : s) expect += ph.flows.classes.size();
  for (std::string line; std::getline(is, line);) {
    flows += line.rfind("flow ", 0) == 0;
    phases += line.rfind("phase ", 0) == 0;
  }
  EXPECT_EQ(flows, expect);
  EXPECT_EQ(phases, s.size());
}

}  // namespace
}  // namespace sweff

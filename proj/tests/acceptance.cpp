// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sweff/experiment.hpp"
#include "sweff/flow_engine.hpp"
#include "sweff/traffic.hpp"
#include "sweff/validation.hpp"
#include "sweff/workload.hpp"

namespace {

using namespace sweff;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const char* name, Verdict& v) {
  failures += v.pass ? 0 : 1;
  std::printf("%s %2d %s%s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.str().c_str());
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Loose reproduction band: 0.05 absolute or 20% relative, whichever is wider.
bool near(double actual, double expected) {
  return std::abs(actual - expected) <= std::max(0.05, 0.2 * std::abs(expected));
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

void check_near(Verdict& v, const std::string& what, double actual, double expected) {
  v.detail << ' ' << what << '=' << fmt(actual);
  v.require(near(actual, expected), what + " expected ~" + fmt(expected));
}

std::vector<GpuId> iota_group(int n) {
  std::vector<GpuId> g(n);
  std::iota(g.begin(), g.end(), 0);
  return g;
}

PrimitiveInstance prim(PrimitiveKind k, std::vector<GpuId> g, Bytes d, std::int64_t kr = 1) {
  PrimitiveInstance p;
  p.kind = k;
  p.group = std::move(g);
  p.tensor_size = d;
  p.routed_experts = kr;
  p.tag = PhaseTag::TP;
  return p;
}

Topology ring_torus(int n) {
  TorusParams p;
  p.dims = {n, 1, 1};
  return build_torus(n, p);
}

void criterion1() {
  Verdict v;
  const Bytes d = 1 << 20;
  for (int n : {2, 4, 8}) {
    for (int kr : {1, 2, 4}) {
      const double nn = n;
      const std::map<PrimitiveKind, double> want{
          {PrimitiveKind::PointToPoint, nn * d},
          {PrimitiveKind::AllGather, nn * (d / nn) * (nn - 1)},
          {PrimitiveKind::ReduceScatter, nn * (d / nn)},
          {PrimitiveKind::AllReduce, nn * d},
          {PrimitiveKind::AllToAllDispatch, nn * (d / nn) * (nn - 1) * kr},
          {PrimitiveKind::AllToAllCombine, nn * (d / nn) * (nn - 1)},
      };
      for (const auto& [k, w] : want) {
        v.require(effective_volume(k, n, d, kr) == w,
                  std::string(to_string(k)) + " n=" + std::to_string(n));
      }
    }
  }
  report(1, "effective volume for all six primitive kinds", v);
}

void criterion2() {
  Verdict v;
  for (int n = 2; n <= 8; ++n) {
    auto t = ring_torus(n);
    const auto rs = evaluate_primitives(t, {prim(PrimitiveKind::ReduceScatter, iota_group(n), 1e6)});
    const auto ar = evaluate_primitives(t, {prim(PrimitiveKind::AllReduce, iota_group(n), 1e6)});
    v.require(rel(rs.metrics.gamma, 1.0 / (n - 1)) < 1e-12, "RS n=" + std::to_string(n));
    v.require(rel(ar.metrics.gamma, n / (2.0 * (n - 1))) < 1e-12, "AR n=" + std::to_string(n));
  }
  for (int kr : {1, 2, 4, 8}) {
    auto t = ring_torus(2 * kr);
    const auto c = evaluate_primitives(
        t, {prim(PrimitiveKind::AllToAllCombine, iota_group(2 * kr), 1e6, kr)});
    v.require(rel(c.metrics.gamma, 1.0 / kr) < 1e-12, "combine k_r=" + std::to_string(kr));
  }
  report(2, "closed-form data efficiency of ring and exchange primitives", v);
}

void criterion3() {
  Verdict v;
  // Two leaf groups: radix 4 leaves hold two servers of two GPUs each.
  RailParams p;
  p.gpus_per_server = 2;
  p.switch_radix = 4;
  auto t = build_rail(8, p);
  v.require(t.rail.planes[0].tiers == 2, "toy should have two tiers");
  auto flow = [&](GpuId a, GpuId b) {
    FlowSet f;
    f.classes.push_back({a, b, 1e6, 1});
    Phase ph;
    ph.tag = PhaseTag::PP;
    ph.primitives.push_back(prim(PrimitiveKind::PointToPoint, {a, b}, 1e6));
    ph.flows = f;
    return evaluate_workload(t, {ph}).metrics.delta;
  };
  const double cross = flow(0, 4);
  const double intra = flow(0, 1);
  v.detail << " leaf-spine-leaf=" << fmt(cross) << " intra=" << fmt(intra);
  v.require(rel(cross, 1.0 / 3.0) < 1e-12, "leaf-spine-leaf");
  v.require(intra == 1.0, "intra-server");
  report(3, "routing efficiency of intra-server and leaf-spine-leaf paths", v);
}

void criterion4() {
  Verdict v;
  TorusParams tp;
  tp.dims = {8, 8, 8};
  auto t = build_torus(512, tp);
  std::vector<PrimitiveInstance> prims;
  for (int y = 0; y < 8; ++y) {
    for (int z = 0; z < 8; ++z) {
      std::vector<GpuId> g;
      for (int x = 0; x < 8; ++x) g.push_back(t.torus.gpu_at({x, y, z}));
      prims.push_back(prim(PrimitiveKind::AllReduce, g, 1e9));
    }
  }
  const auto m = evaluate_primitives(t, prims).metrics;
  v.detail << " spatial=" << fmt(m.theta_spatial) << " temporal=" << fmt(m.theta_temporal);
  v.require(rel(m.theta_spatial, 2.0 / 6.0) < 1e-12, "spatial");
  v.require(m.theta_temporal >= 0.99, "temporal");
  report(4, "torus tensor ring port utilization", v);
}

std::vector<MetricsRecord> all_records;

void collect(const RunReport& r) {
  for (const auto& s : r.suites)
    for (const auto& w : s.workloads)
      if (w.ok) all_records.push_back(w.metrics);
}

void criterion5() {
  Verdict v;
  double worst = 0;
  for (const auto& m : all_records) {
    worst = std::max({worst, rel(m.eta, m.gamma * m.delta * m.theta), rel(m.mu, m.delta * m.theta)});
  }
  v.detail << " workloads=" << all_records.size() << " max_rel_err=" << worst;
  v.require(!all_records.empty() && worst < 1e-12, "identity");
  report(5, "decomposition identity on every evaluated workload", v);
}

void criterion6() {
  Verdict v;
  auto topo = std::make_shared<const Topology>(build_rail(256, {}));
  std::vector<MetricsRecord> recs;
  for (const auto& c : enumerate_configs(256, ModelKind::Dense)) {
    if (recs.size() == 3) break;
    auto w = scale_workload(c, ReferenceModel::GPT3, {});
    auto pw = place_groups(c, topo);
    recs.push_back(
        evaluate_workload(*pw.topology, build_iteration_schedule(w, pw.layout, *pw.topology))
            .metrics);
  }
  const auto a = aggregate_metrics(recs);
  double eff = 0, cap = 0;
  for (const auto& r : recs) {
    eff += r.effective_bytes;
    cap += r.capacity * r.duration;
  }
  v.detail << " pooled=" << fmt(eff / cap) << " weighted=" << fmt(a.eta_bar_weighted);
  v.require(rel(a.eta_bar, eff / cap) < 1e-12, "pooled form");
  v.require(rel(a.eta_bar, a.eta_bar_weighted) < 1e-12, "weighted form");
  report(6, "pooled and time-weighted suite efficiency agree", v);
}

void criterion7() {
  Verdict v;
  std::mt19937_64 rng(42);
  int checked = 0;
  for (int trial = 0; trial < 16; ++trial) {
    const int n = trial % 2 ? 64 : 32;
    Topology t;
    if (trial % 4 < 2) {
      RailParams p;
      p.gpus_per_server = 4;
      p.switch_radix = trial % 3 ? 8 : 16;
      p.plane_count = 1 + trial % 2;
      t = build_rail(n, p);
    } else {
      t = build_torus(n, {});
    }
    std::uniform_int_distribution<GpuId> g(0, n - 1);
    FlowSet f;
    for (int i = 0; i < 200; ++i) {
      const GpuId a = g(rng), b = g(rng);
      if (a != b) f.classes.push_back({a, b, static_cast<Bytes>(1 + i % 97), 1});
    }
    // Collectives conserve bytes end to end.
    f.append(expand_ring_collective(PrimitiveKind::AllReduce, iota_group(n), 1024.0 * n));
    f.append(expand_a2a(iota_group(n), 1024.0 * n, 3, PrimitiveKind::AllToAllDispatch));
    v.require(f.sent_total() == f.received_total(), "collective bytes");
    auto acc = route_flows(t, f, {false});
    std::vector<double> in(t.nodes.size(), 0.0), out(t.nodes.size(), 0.0);
    for (const auto& p : t.ports) {
      out[p.src] += acc.port_bytes[p.id];
      in[p.dst] += acc.port_bytes[p.id];
    }
    if (t.is_torus()) {
      for (const auto& c : f.classes) {
        in[t.attachment[c.src]] += c.total();
        out[t.attachment[c.dst]] += c.total();
      }
      for (const auto& x : f.exchanges) {
        const double per = x.pair_volume * (x.group.size() - 1);
        for (GpuId m : x.group) {
          in[t.attachment[m]] += per;
          out[t.attachment[m]] += per;
        }
      }
    }
    for (const auto& node : t.nodes) {
      if (node.kind == NodeKind::Gpu) continue;
      ++checked;
      v.require(std::abs(in[node.id] - out[node.id]) <= 1e-9 * (1 + in[node.id]),
                "switch " + std::to_string(node.id));
    }
  }
  v.detail << " switches=" << checked;
  report(7, "flow conservation at every switch and per collective", v);
}

void criterion8() {
  Verdict v;
  double worst = 0;
  auto compare = [&](const Topology& t, const std::vector<std::vector<GpuId>>& groups,
                     TorusDirection dir) {
    auto agg = aggregate_a2a_analytically(groups, t, 4096.0, 4, dir);
    FlowSet f;
    for (const auto& g : groups) f.append(expand_a2a_pairwise(g, 4096.0, 4));
    f.torus_direction = dir;
    auto acc = route_flows(t, f);
    for (std::size_t i = 0; i < acc.port_bytes.size(); ++i) {
      const double d = std::abs(agg.port_bytes[i] - acc.port_bytes[i]);
      worst = std::max(worst, d / std::max(1.0, acc.port_bytes[i]));
    }
  };
  for (int n : {2, 8, 16, 64}) {
    auto t = ring_torus(n);
    compare(t, {iota_group(n)}, TorusDirection::Positive);
    compare(t, {iota_group(n)}, TorusDirection::Minimal);
  }
  for (int planes : {1, 2}) {
    RailParams p;
    p.gpus_per_server = 4;
    p.switch_radix = 8;
    p.plane_count = planes;
    auto t = build_rail(64, p);
    for (int size : {2, 4, 8, 16, 32, 64}) {
      std::vector<std::vector<GpuId>> groups;
      for (int s = 0; s < 64; s += size) {
        std::vector<GpuId> g(size);
        std::iota(g.begin(), g.end(), s);
        groups.push_back(g);
      }
      compare(t, groups, TorusDirection::Positive);
    }
  }
  v.detail << " max_rel_diff=" << worst;
  v.require(worst < 1e-12, "port bytes");
  report(8, "analytic and pairwise exchange port bytes agree", v);
}

const SuiteResult& find(const RunReport& r, const std::string& variant, ModelKind m,
                        double value = -1) {
  for (const auto& s : r.suites) {
    if (s.variant == variant && s.model == m && (value < 0 || s.sweep_value == value)) return s;
  }
  throw Error("missing suite " + variant);
}

ExperimentConfig base_config() {
  ExperimentConfig c;
  c.cluster_size = 4096;
  return c;
}

void criterion9and10(const RunReport& r) {
  {
    Verdict v;
    const auto& t = *find(r, "torus", ModelKind::Dense).aggregate;
    const auto& a = *find(r, "rail", ModelKind::Dense).aggregate;
    check_near(v, "torus.gamma", t.gamma_bar, 0.64);
    check_near(v, "rail.gamma", a.gamma_bar, 0.64);
    v.detail << " torus.delta=" << fmt(t.delta_bar);
    v.require(std::abs(t.delta_bar - 1.0) < 1e-12, "torus.delta exactly 1");
    check_near(v, "rail.delta", a.delta_bar, 0.96);
    check_near(v, "rail.theta", a.theta_bar, 0.51);
    check_near(v, "torus.theta", t.theta_bar, 0.32);
    check_near(v, "rail.eta", a.eta_bar, 0.32);
    check_near(v, "torus.eta", t.eta_bar, 0.21);
    check_near(v, "rail.mu", a.mu_bar, 0.49);
    report(9, "dense baseline aggregates at 4096 GPUs", v);
  }
  {
    Verdict v;
    const auto& t = *find(r, "torus", ModelKind::MoE).aggregate;
    const auto& a = *find(r, "rail", ModelKind::MoE).aggregate;
    check_near(v, "torus.gamma", t.gamma_bar, 0.53);
    check_near(v, "rail.gamma", a.gamma_bar, 0.53);
    check_near(v, "torus.delta", t.delta_bar, 0.05);
    check_near(v, "rail.delta", a.delta_bar, 0.41);
    check_near(v, "torus.theta", t.theta_bar, 0.17);
    check_near(v, "rail.theta", a.theta_bar, 0.21);
    check_near(v, "torus.eta", t.eta_bar, 0.004);
    check_near(v, "rail.eta", a.eta_bar, 0.046);
    check_near(v, "rail.mu", a.mu_bar, 0.085);
    report(10, "MoE baseline aggregates at 4096 GPUs", v);
  }
}

void criterion11() {
  auto c = base_config();
  c.arch = ArchSelection::Rail;
  c.models = ModelSelection::Dense;
  c.sweep = SweepAxis::INC;
  const auto r = run_sweep(c);
  collect(r);
  Verdict v;
  const auto& off = *find(r, "rail", ModelKind::Dense, 0).aggregate;
  const auto& on = *find(r, "rail", ModelKind::Dense, 1).aggregate;
  v.detail << " gamma.on=" << fmt(on.gamma_bar);
  v.require(on.gamma_bar >= 0.97, "gamma with INC >= 0.97");
  check_near(v, "eta.off", off.eta_bar, 0.32);
  check_near(v, "eta.on", on.eta_bar, 0.45);
  v.require(on.eta_bar > off.eta_bar, "eta rises");
  report(11, "in-network reduction on the rail fabric", v);
}

void criterion12() {
  auto c = base_config();
  c.arch = ArchSelection::Torus;
  c.sweep = SweepAxis::TieredRatio;
  const auto torus = run_sweep(c);
  collect(torus);
  auto rc = base_config();
  rc.arch = ArchSelection::Rail;
  rc.models = ModelSelection::MoE;
  rc.sweep = SweepAxis::TieredRatio;
  rc.sweep_values = {1, 9};
  const auto rail = run_sweep(rc);
  collect(rail);
  Verdict v;
  for (auto m : {ModelKind::Dense, ModelKind::MoE}) {
    double base = 0, best = 0;
    for (const auto& s : torus.suites) {
      if (s.model != m || !s.aggregate) continue;
      if (s.sweep_value == 1) base = s.aggregate->theta_bar;
      best = std::max(best, s.aggregate->theta_bar);
    }
    const std::string tag = m == ModelKind::Dense ? "torus.dense" : "torus.moe";
    check_near(v, tag + ".base", base, m == ModelKind::Dense ? 0.32 : 0.17);
    check_near(v, tag + ".best", best, m == ModelKind::Dense ? 0.57 : 0.44);
  }
  check_near(v, "rail.moe@1", find(rail, "rail", ModelKind::MoE, 1).aggregate->theta_bar, 0.40);
  check_near(v, "rail.moe@9", find(rail, "rail", ModelKind::MoE, 9).aggregate->theta_bar, 0.21);
  report(12, "tiered bandwidth ratio endpoints", v);
}

RunReport server_sweep;

void criterion13() {
  auto c = base_config();
  c.arch = ArchSelection::Rail;
  c.models = ModelSelection::MoE;
  c.sweep = SweepAxis::ServerSize;
  server_sweep = run_sweep(c);
  collect(server_sweep);
  Verdict v;
  check_near(v, "mu@8", find(server_sweep, "rail", ModelKind::MoE, 8).aggregate->mu_bar, 0.09);
  check_near(v, "mu@256", find(server_sweep, "rail", ModelKind::MoE, 256).aggregate->mu_bar,
             0.58);
  report(13, "server size endpoints for MoE network efficiency", v);
}

std::map<int, double> eta_by_scale(const RunReport& r, const std::string& variant, ModelKind m) {
  std::map<int, double> out;
  for (const auto& s : r.suites) {
    if (s.variant == variant && s.model == m && s.aggregate) out[s.cluster_size] = s.aggregate->eta_bar;
  }
  return out;
}

std::string series(const std::map<int, double>& s) {
  std::string out;
  for (const auto& [n, e] : s) out += (out.empty() ? "" : ",") + fmt(e);
  return out;
}

// Scale of the last step where the value falls by more than `drop`; the
// plateau runs up to the scale before it.
int last_drop(const std::map<int, double>& s, double drop) {
  int at = 0;
  double prev = s.begin()->second;
  for (const auto& [n, e] : s) {
    if (e < prev - drop) at = n;
    prev = e;
  }
  return at;
}

void criterion14and15() {
  auto c = base_config();
  c.sweep = SweepAxis::ClusterScale;
  c.plane_counts = {1, 8};
  const auto r = run_sweep(c);
  collect(r);
  const auto scales = default_sweep_values(SweepAxis::ClusterScale);
  {
    Verdict v;
    const auto torus = eta_by_scale(r, "torus", ModelKind::Dense);
    const auto one = eta_by_scale(r, "rail-p1", ModelKind::Dense);
    const auto eight = eta_by_scale(r, "rail-p8", ModelKind::Dense);
    v.require(torus.size() == scales.size() && one.size() == scales.size() &&
                  eight.size() == scales.size(),
              "missing scales");
    v.detail << " torus=" << series(torus) << " p1=" << series(one) << " p8=" << series(eight);
    double lo = 1, hi = 0;
    for (const auto& [n, e] : torus) {
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    v.require(hi - lo < 0.02, "torus flat");
    bool dropped = false;
    RailParams single;
    int prev_n = 0;
    for (const auto& [n, e] : one) {
      if (prev_n) {
        v.require(e <= one.at(prev_n) + 1e-12, "p1 rises at " + std::to_string(n));
        if (rail_tier_count(n, single) > rail_tier_count(prev_n, single) &&
            e < one.at(prev_n) - 1e-3) {
          dropped = true;
        }
      }
      prev_n = n;
    }
    v.require(dropped, "p1 drop where a tier is added");
    for (const auto& [n, e] : one) {
      v.require(eight.count(n) && eight.at(n) >= e - 1e-12, "p8 below p1 at " + std::to_string(n));
    }
    const int end1 = last_drop(one, 0.02), end8 = last_drop(eight, 0.02);
    v.detail << " p1.drop=" << end1 << " p8.drop=" << end8;
    v.require(end8 > end1, "p8 plateau extends further");
    v.require(end8 > 16384, "p8 plateau holds through 16384");
    report(14, "dense efficiency across cluster scales", v);
  }
  {
    Verdict v;
    const auto torus = eta_by_scale(r, "torus", ModelKind::MoE);
    const auto one = eta_by_scale(r, "rail-p1", ModelKind::MoE);
    const auto eight = eta_by_scale(r, "rail-p8", ModelKind::MoE);
    v.detail << " torus=" << series(torus) << " p1=" << series(one) << " p8=" << series(eight);
    auto strictly_down = [&](const std::map<int, double>& s, const std::string& name) {
      double prev = std::numeric_limits<double>::infinity();
      for (const auto& [n, e] : s) {
        v.require(e < prev, name + " not decreasing at " + std::to_string(n));
        prev = e;
      }
    };
    strictly_down(torus, "torus");
    strictly_down(one, "p1");
    v.require(torus.count(16384) && torus.at(16384) < 0.005, "torus below 0.005 by 16384");
    for (const auto& [n, e] : one) {
      v.require(eight.count(n) && eight.at(n) > e, "p8 not above p1 at " + std::to_string(n));
    }
    report(15, "MoE efficiency across cluster scales", v);
  }
}

void criterion16() {
  Verdict v;
  std::map<std::string, const WorkloadResult*> at8;
  for (const auto& s : server_sweep.suites) {
    if (s.sweep_value != 8) continue;
    for (const auto& w : s.workloads) at8[w.id()] = &w;
  }
  int compared = 0;
  for (const auto& s : server_sweep.suites) {
    const int size = static_cast<int>(s.sweep_value);
    if (size == 8) continue;
    for (const auto& w : s.workloads) {
      if (w.config.e != size || !w.ok || !at8.count(w.id())) continue;
      const auto& b = at8.at(w.id())->metrics;
      const double dr = w.metrics.delta / b.delta;
      const double tr = w.metrics.theta / b.theta;
      ++compared;
      v.require(dr >= 2.0, w.id() + " delta x" + fmt(dr));
      v.require(tr >= 2.0, w.id() + " theta x" + fmt(tr));
    }
  }
  v.detail << " workloads=" << compared;
  v.require(compared > 0, "no matched workloads");
  report(16, "server size matched to expert parallel size", v);
}

}  // namespace

int main() {
  try {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion6();
    criterion7();
    criterion8();
    const auto baseline = run_dissection(base_config());
    collect(baseline);
    criterion9and10(baseline);
    criterion11();
    criterion12();
    criterion13();
    criterion16();
    criterion14and15();
    criterion5();
  } catch (const std::exception& e) {
    std::printf("FAIL    aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include "sweff/flow_engine.hpp"

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>

namespace sweff {

TrafficAccount::TrafficAccount(const Topology& topology)
    : port_bytes(topology.ports.size(), 0.0),
      gpu_received(static_cast<std::size_t>(topology.gpu_count), 0.0) {}

namespace {

void check_gpu(const Topology& t, GpuId g) {
  if (g < 0 || g >= t.gpu_count) {
    throw RoutingError("GPU " + std::to_string(g) + " is not in the topology");
  }
}

// Direction choices along one torus axis: (positive, hops, weight).
struct AxisMove {
  bool positive;
  int hops;
  double weight;
};

int torus_moves(int from, int to, int len, TorusDirection dir, AxisMove out[2]) {
  const int f = ((to - from) % len + len) % len;
  if (f == 0) return 0;
  if (dir == TorusDirection::Positive || 2 * f < len) {
    out[0] = {true, f, 1.0};
    return 1;
  }
  if (2 * f > len) {
    out[0] = {false, len - f, 1.0};
    return 1;
  }
  out[0] = {true, f, 0.5};
  out[1] = {false, f, 0.5};
  return 2;
}

// Dimension-ordered walk (X, then Y, then Z). Where each axis lands does
// not depend on the direction taken, so axes are independent.
void torus_flow(const Topology& t, GpuId s, GpuId d, Bytes vol, TorusDirection dir,
                std::vector<Bytes>& pb) {
  const auto& ti = t.torus;
  auto c = ti.coord(s);
  const auto cd = ti.coord(d);
  for (int a = 0; a < 3; ++a) {
    const int len = ti.dims[a];
    AxisMove moves[2];
    const int k = torus_moves(c[a], cd[a], len, dir, moves);
    for (int m = 0; m < k; ++m) {
      auto cur = c;
      for (int h = 0; h < moves[m].hops; ++h) {
        pb[TorusIndex::port(ti.gpu_at(cur), a, moves[m].positive)] += vol * moves[m].weight;
        cur[a] = (cur[a] + (moves[m].positive ? 1 : len - 1)) % len;
      }
    }
    c[a] = cd[a];
  }
}

// Inter-leaf traffic is collected per leaf and per pod and spread over the
// uplinks at the end. Uniform wiring makes per-hop ECMP land evenly on every
// uplink of a leaf, every spine link into a leaf, every spine uplink of a
// pod and every core link into a pod.
struct RailSpread {
  struct Plane {
    std::vector<Bytes> leaf_out, leaf_in, pod_out, pod_in;
  };
  std::vector<Plane> planes;

  explicit RailSpread(const Topology& t) {
    for (const auto& p : t.rail.planes) {
      Plane q;
      q.leaf_out.assign(p.leaf_nodes.size(), 0.0);
      q.leaf_in.assign(p.leaf_nodes.size(), 0.0);
      q.pod_out.assign(static_cast<std::size_t>(p.pod_count), 0.0);
      q.pod_in.assign(static_cast<std::size_t>(p.pod_count), 0.0);
      planes.push_back(std::move(q));
    }
  }

  void cross_leaf(int plane, int from_leaf, int to_leaf, int from_pod, int to_pod, Bytes v) {
    auto& q = planes[plane];
    q.leaf_out[from_leaf] += v;
    q.leaf_in[to_leaf] += v;
    if (from_pod != to_pod) {
      q.pod_out[from_pod] += v;
      q.pod_in[to_pod] += v;
    }
  }

  void flush(const Topology& t, std::vector<Bytes>& pb) const {
    auto spread = [&](const std::vector<PortId>& ports, Bytes v) {
      if (v == 0.0) return;
      if (ports.empty()) throw RoutingError("rail: no uplinks for inter-leaf traffic");
      const Bytes each = v / static_cast<double>(ports.size());
      for (PortId p : ports) pb[p] += each;
    };
    for (std::size_t pl = 0; pl < planes.size(); ++pl) {
      const auto& rp = t.rail.planes[pl];
      const auto& q = planes[pl];
      for (std::size_t l = 0; l < q.leaf_out.size(); ++l) {
        spread(rp.leaf_up[l], q.leaf_out[l]);
        spread(rp.spine_to_leaf[l], q.leaf_in[l]);
      }
      for (std::size_t p = 0; p < q.pod_out.size(); ++p) {
        spread(rp.spine_up[p], q.pod_out[p]);
        spread(rp.core_to_pod[p], q.pod_in[p]);
      }
    }
  }
};

void rail_flow(const Topology& t, GpuId s, GpuId d, Bytes vol, std::vector<Bytes>& pb,
               RailSpread& spread) {
  const auto& r = t.rail;
  if (r.server_of(s) == r.server_of(d)) {
    pb[r.gpu_to_intra[s]] += vol;
    pb[r.intra_to_gpu[d]] += vol;
    return;
  }
  const Bytes v = vol / static_cast<double>(r.planes.size());
  for (std::size_t pl = 0; pl < r.planes.size(); ++pl) {
    const auto& p = r.planes[pl];
    pb[p.nic_port[s]] += v;
    pb[p.leaf_down_port[d]] += v;
    const int ls = p.leaf_of_gpu[s], ld = p.leaf_of_gpu[d];
    if (ls != ld) {
      spread.cross_leaf(static_cast<int>(pl), ls, ld, p.pod_of_leaf[ls], p.pod_of_leaf[ld], v);
    }
  }
}

void route_class(const Topology& t, const FlowClass& c, TorusDirection dir, TrafficAccount& acc,
                 RailSpread* spread) {
  check_gpu(t, c.src);
  check_gpu(t, c.dst);
  if (c.src == c.dst) throw RoutingError("flow from GPU " + std::to_string(c.src) + " to itself");
  const Bytes vol = c.total();
  if (t.is_torus()) {
    torus_flow(t, c.src, c.dst, vol, dir, acc.port_bytes);
  } else {
    rail_flow(t, c.src, c.dst, vol, acc.port_bytes, *spread);
  }
  acc.gpu_received[c.dst] += vol;
}

// Index of the axis along which the group forms one whole ring, or -1.
int whole_ring_axis(const Topology& t, const std::vector<GpuId>& group) {
  const auto& ti = t.torus;
  const int n = static_cast<int>(group.size());
  const auto c0 = ti.coord(group.front());
  for (int a = 0; a < 3; ++a) {
    if (ti.dims[a] != n) continue;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    bool ok = true;
    for (GpuId g : group) {
      const auto c = ti.coord(g);
      for (int b = 0; b < 3; ++b) {
        if (b != a && c[b] != c0[b]) ok = false;
      }
      if (!ok || seen[c[a]]) {
        ok = false;
        break;
      }
      seen[c[a]] = 1;
    }
    if (ok) return a;
  }
  return -1;
}

void exchange_pairwise(const Topology& t, const UniformExchange& x, TorusDirection dir,
                       TrafficAccount& acc, RailSpread* spread) {
  for (GpuId s : x.group) {
    for (GpuId d : x.group) {
      if (s != d) route_class(t, {s, d, x.pair_volume, 1}, dir, acc, spread);
    }
  }
}

// Returns false when the torus placement has no closed form.
bool exchange_analytic(const Topology& t, const UniformExchange& x, TorusDirection dir,
                       TrafficAccount& acc, RailSpread* spread) {
  const auto n = static_cast<long long>(x.group.size());
  const Bytes v = x.pair_volume;
  for (GpuId g : x.group) check_gpu(t, g);
  if (t.is_torus()) {
    const int a = whole_ring_axis(t, x.group);
    if (a < 0) return false;
    // Hop-bytes summed over ordered pairs, spread evenly over the ring.
    double per_port_pos = 0.0, per_port_neg = 0.0;
    if (dir == TorusDirection::Positive) {
      per_port_pos = v * static_cast<double>(n * (n - 1) / 2);
    } else {
      long long s = 0;
      for (long long f = 1; f < n; ++f) s += std::min(f, n - f);
      per_port_pos = per_port_neg = v * static_cast<double>(s) / 2.0;
    }
    for (GpuId g : x.group) {
      if (per_port_pos != 0.0) acc.port_bytes[TorusIndex::port(g, a, true)] += per_port_pos;
      if (per_port_neg != 0.0) acc.port_bytes[TorusIndex::port(g, a, false)] += per_port_neg;
      acc.gpu_received[g] += v * static_cast<double>(n - 1);
    }
    return true;
  }

  const auto& r = t.rail;
  const double planes = static_cast<double>(r.planes.size());
  std::unordered_map<int, long long> per_server;
  for (GpuId g : x.group) ++per_server[r.server_of(g)];
  for (GpuId g : x.group) {
    const long long local = per_server[r.server_of(g)];
    acc.port_bytes[r.gpu_to_intra[g]] += v * static_cast<double>(local - 1);
    acc.port_bytes[r.intra_to_gpu[g]] += v * static_cast<double>(local - 1);
    acc.gpu_received[g] += v * static_cast<double>(n - 1);
    const Bytes remote = v * static_cast<double>(n - local) / planes;
    if (remote == 0.0) continue;
    for (const auto& p : r.planes) {
      acc.port_bytes[p.nic_port[g]] += remote;
      acc.port_bytes[p.leaf_down_port[g]] += remote;
    }
  }
  // Pairs that leave a leaf (or pod): the other member is outside it and
  // on another server, since same-server pairs stay on the intra switch.
  auto key = [](long long a, long long b) { return (a << 32) | b; };
  for (std::size_t pl = 0; pl < r.planes.size(); ++pl) {
    const auto& p = r.planes[pl];
    std::unordered_map<int, long long> per_leaf, per_pod;
    std::unordered_map<long long, long long> server_leaf, server_pod;
    for (GpuId g : x.group) {
      const int leaf = p.leaf_of_gpu[g], pod = p.pod_of_leaf[leaf], srv = r.server_of(g);
      ++per_leaf[leaf];
      ++per_pod[pod];
      ++server_leaf[key(srv, leaf)];
      ++server_pod[key(srv, pod)];
    }
    auto& q = spread->planes[pl];
    for (GpuId g : x.group) {
      const int leaf = p.leaf_of_gpu[g], pod = p.pod_of_leaf[leaf], srv = r.server_of(g);
      const long long local = per_server[srv];
      const long long leaf_pairs =
          n - per_leaf[leaf] - local + server_leaf[key(srv, leaf)];
      const long long pod_pairs = n - per_pod[pod] - local + server_pod[key(srv, pod)];
      const Bytes out_leaf = v * static_cast<double>(leaf_pairs) / planes;
      const Bytes out_pod = v * static_cast<double>(pod_pairs) / planes;
      q.leaf_out[leaf] += out_leaf;
      q.leaf_in[leaf] += out_leaf;
      q.pod_out[pod] += out_pod;
      q.pod_in[pod] += out_pod;
    }
  }
  return true;
}

void route_reduction(const Topology& t, const ReductionGroup& r, TrafficAccount& acc) {
  if (t.is_torus()) throw RoutingError("in-switch reduction needs a shared switch");
  for (GpuId g : r.group) {
    check_gpu(t, g);
    if (t.rail.intra_switch[t.rail.server_of(g)] != r.reducer) {
      throw RoutingError("GPU " + std::to_string(g) + " is not under reducing switch " +
                         std::to_string(r.reducer));
    }
    acc.port_bytes[t.rail.gpu_to_intra[g]] += r.volume;
    acc.port_bytes[t.rail.intra_to_gpu[g]] += r.volume;
    acc.gpu_received[g] += r.volume;
  }
}

}  // namespace

void route_flows(const Topology& topology, const FlowSet& flows, TrafficAccount& account,
                 const RouteOptions& options) {
  if (account.port_bytes.size() != topology.ports.size() ||
      account.gpu_received.size() != static_cast<std::size_t>(topology.gpu_count)) {
    throw RoutingError("traffic account does not match the topology");
  }
  std::optional<RailSpread> spread;
  if (!topology.is_torus()) spread.emplace(topology);
  RailSpread* sp = spread ? &*spread : nullptr;
  const TorusDirection dir = flows.torus_direction;
  for (const auto& c : flows.classes) route_class(topology, c, dir, account, sp);
  for (const auto& x : flows.exchanges) {
    if (x.group.size() < 2) continue;
    if (!options.analytic_exchange || !exchange_analytic(topology, x, dir, account, sp)) {
      exchange_pairwise(topology, x, dir, account, sp);
    }
  }
  for (const auto& r : flows.reductions) route_reduction(topology, r, account);
  if (sp) sp->flush(topology, account.port_bytes);
}

TrafficAccount route_flows(const Topology& topology, const FlowSet& flows,
                           const RouteOptions& options) {
  TrafficAccount acc(topology);
  route_flows(topology, flows, acc, options);
  return acc;
}

ExchangeAggregate aggregate_a2a_analytically(const std::vector<std::vector<GpuId>>& groups,
                                             const Topology& topology, Bytes D,
                                             std::int64_t k_r, TorusDirection direction) {
  if (!(D > 0.0)) throw DomainError("aggregate_a2a_analytically: tensor size must be positive");
  if (k_r < 1) throw DomainError("aggregate_a2a_analytically: routed experts must be >= 1");
  TrafficAccount acc(topology);
  std::optional<RailSpread> spread;
  if (!topology.is_torus()) spread.emplace(topology);
  RailSpread* sp = spread ? &*spread : nullptr;
  ExchangeAggregate out;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    UniformExchange x{g, static_cast<double>(k_r) * D / static_cast<double>(g.size())};
    if (!exchange_analytic(topology, x, direction, acc, sp)) {
      exchange_pairwise(topology, x, direction, acc, sp);
      ++out.pairwise_groups;
    }
  }
  if (sp) sp->flush(topology, acc.port_bytes);
  out.port_bytes = std::move(acc.port_bytes);
  out.gpu_received = std::move(acc.gpu_received);
  return out;
}

namespace {

std::vector<PathShare> rail_paths(const Topology& t, GpuId s, GpuId d) {
  const auto& r = t.rail;
  if (r.server_of(s) == r.server_of(d)) return {{{r.gpu_to_intra[s], r.intra_to_gpu[d]}, 1.0}};
  std::vector<PathShare> out;
  const double plane_w = 1.0 / static_cast<double>(r.planes.size());
  auto from = [&](const std::vector<PortId>& ports, NodeId node) {
    std::vector<PortId> o;
    for (PortId p : ports)
      if (t.ports[p].src == node) o.push_back(p);
    return o;
  };
  for (const auto& p : r.planes) {
    const int ls = p.leaf_of_gpu[s], ld = p.leaf_of_gpu[d];
    if (ls == ld) {
      out.push_back({{p.nic_port[s], p.leaf_down_port[d]}, plane_w});
      continue;
    }
    const int ps = p.pod_of_leaf[ls], pd = p.pod_of_leaf[ld];
    const double up_w = plane_w / static_cast<double>(p.leaf_up[ls].size());
    for (PortId up : p.leaf_up[ls]) {
      const NodeId spine = t.ports[up].dst;
      if (ps == pd) {
        const auto down = from(p.spine_to_leaf[ld], spine);
        for (PortId dn : down) {
          out.push_back({{p.nic_port[s], up, dn, p.leaf_down_port[d]},
                         up_w / static_cast<double>(down.size())});
        }
        continue;
      }
      const auto to_core = from(p.spine_up[ps], spine);
      for (PortId sc : to_core) {
        const double w1 = up_w / static_cast<double>(to_core.size());
        const auto to_pod = from(p.core_to_pod[pd], t.ports[sc].dst);
        for (PortId cs : to_pod) {
          const double w2 = w1 / static_cast<double>(to_pod.size());
          const auto down = from(p.spine_to_leaf[ld], t.ports[cs].dst);
          for (PortId dn : down) {
            out.push_back({{p.nic_port[s], up, sc, cs, dn, p.leaf_down_port[d]},
                           w2 / static_cast<double>(down.size())});
          }
        }
      }
    }
  }
  return out;
}

std::vector<PathShare> torus_paths(const Topology& t, GpuId s, GpuId d, TorusDirection dir) {
  const auto& ti = t.torus;
  std::vector<PathShare> out{{{}, 1.0}};
  auto c = ti.coord(s);
  const auto cd = ti.coord(d);
  for (int a = 0; a < 3; ++a) {
    const int len = ti.dims[a];
    AxisMove moves[2];
    const int k = torus_moves(c[a], cd[a], len, dir, moves);
    if (k == 0) continue;
    std::vector<PathShare> next;
    for (const auto& base : out) {
      for (int m = 0; m < k; ++m) {
        PathShare ps = base;
        ps.weight *= moves[m].weight;
        auto cur = c;
        for (int h = 0; h < moves[m].hops; ++h) {
          ps.ports.push_back(TorusIndex::port(ti.gpu_at(cur), a, moves[m].positive));
          cur[a] = (cur[a] + (moves[m].positive ? 1 : len - 1)) % len;
        }
        next.push_back(std::move(ps));
      }
    }
    out = std::move(next);
    c[a] = cd[a];
  }
  return out;
}

}  // namespace

std::vector<PathShare> route_pair(const Topology& topology, GpuId src, GpuId dst,
                                  TorusDirection direction) {
  check_gpu(topology, src);
  check_gpu(topology, dst);
  if (src == dst) return {};
  return topology.is_torus() ? torus_paths(topology, src, dst, direction)
                             : rail_paths(topology, src, dst);
}

RouteTable build_route_table(const Topology& topology, const FlowSet& flows) {
  RouteTable rt;
  for (const auto& c : flows.classes) {
    auto key = std::make_pair(c.src, c.dst);
    if (!rt.routes.count(key)) {
      rt.routes[key] = route_pair(topology, c.src, c.dst, flows.torus_direction);
    }
  }
  return rt;
}

Seconds phase_duration(const Topology& topology, std::span<const Bytes> port_bytes) {
  if (port_bytes.size() != topology.ports.size()) {
    throw RoutingError("phase_duration: byte vector does not match the port count");
  }
  Seconds t = 0.0;
  for (std::size_t p = 0; p < port_bytes.size(); ++p) {
    if (port_bytes[p] > 0.0) t = std::max(t, port_bytes[p] / topology.ports[p].rate);
  }
  return t;
}

WorkloadEvaluation evaluate_workload(const Topology& topology, const std::vector<Phase>& schedule,
                                     const RouteOptions& options) {
  WorkloadEvaluation ev;
  const std::size_t slots = topology.inventory_ports.size();
  ev.ledger.port_bytes.assign(slots, 0.0);
  ev.ledger.port_rate.resize(slots);
  for (std::size_t i = 0; i < slots; ++i) {
    ev.ledger.port_rate[i] = topology.ports[topology.inventory_ports[i]].rate;
  }
  ev.ledger.gpu_received.assign(static_cast<std::size_t>(topology.gpu_count), 0.0);
  Bytes effective = 0.0;
  for (const auto& ph : schedule) {
    TrafficAccount acc(topology);
    route_flows(topology, ph.flows, acc, options);
    PhaseTiming pt;
    pt.tag = ph.tag;
    pt.duration = phase_duration(topology, acc.port_bytes);
    pt.effective_bytes = ph.effective_bytes();
    for (std::size_t i = 0; i < slots; ++i) {
      const Bytes b = acc.port_bytes[topology.inventory_ports[i]];
      ev.ledger.port_bytes[i] += b;
      pt.forwarded_bytes += b;
    }
    for (std::size_t g = 0; g < acc.gpu_received.size(); ++g) {
      ev.ledger.gpu_received[g] += acc.gpu_received[g];
      pt.received_bytes += acc.gpu_received[g];
    }
    ev.ledger.duration += pt.duration;
    effective += pt.effective_bytes;
    ev.phases.push_back(pt);
  }
  ev.metrics = compose_metrics(effective, ev.ledger.received_total(), ev.ledger);
  return ev;
}

void write_ledger(std::ostream& os, const Topology& topology, const WorkloadEvaluation& ev) {
  const auto old = os.precision(17);
  os << "# sweff-ledger 1\n";
  os << "# phase\ttag\tduration_s\teffective_bytes\treceived_bytes\tforwarded_bytes\n";
  for (const auto& p : ev.phases) {
    os << "phase\t" << to_string(p.tag) << '\t' << p.duration << '\t' << p.effective_bytes << '\t'
       << p.received_bytes << '\t' << p.forwarded_bytes << '\n';
  }
  os << "# tier\tname\tports\trate_total\tbytes_total\n";
  for (const auto& [tier, ids] : topology.inventory.tiers) {
    Rate rate = 0.0;
    Bytes bytes = 0.0;
    for (PortId p : ids) {
      rate += topology.ports[p].rate;
      bytes += ev.ledger.port_bytes[topology.inventory_slot[p]];
    }
    os << "tier\t" << to_string(tier) << '\t' << ids.size() << '\t' << rate << '\t' << bytes
       << '\n';
  }
  os << "# port\tid\ttier\tplane\trate\tbytes\n";
  for (std::size_t i = 0; i < topology.inventory_ports.size(); ++i) {
    const auto& p = topology.ports[topology.inventory_ports[i]];
    os << "port\t" << p.id << '\t' << to_string(p.tier) << '\t' << p.plane << '\t' << p.rate
       << '\t' << ev.ledger.port_bytes[i] << '\n';
  }
  os << "# gpu\tid\treceived_bytes\n";
  for (std::size_t g = 0; g < ev.ledger.gpu_received.size(); ++g) {
    os << "gpu\t" << g << '\t' << ev.ledger.gpu_received[g] << '\n';
  }
  os << "# total\tduration_s\teffective\treceived\tforwarded\n";
  os << "total\t" << ev.ledger.duration << '\t' << ev.metrics.effective_bytes << '\t'
     << ev.metrics.received_bytes << '\t' << ev.metrics.forwarded_bytes << '\n';
  os.precision(old);
}

}  // namespace sweff

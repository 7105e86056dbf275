// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include "sweff/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sweff {

std::string_view to_string(ArchKind a) {
  return a == ArchKind::Torus3D ? "torus" : "rail";
}

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Gpu: return "gpu";
    case NodeKind::IntraServerSwitch: return "intra-server-switch";
    case NodeKind::LeafSwitch: return "leaf";
    case NodeKind::SpineSwitch: return "spine";
    case NodeKind::CoreSwitch: return "core";
    case NodeKind::GpuResidentSwitch: return "gpu-resident-switch";
  }
  return "unknown";
}

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::Core: return "core";
    case Tier::Spine: return "spine";
    case Tier::Leaf: return "leaf";
    case Tier::IntraServer: return "intra-server";
    case Tier::GpuResident: return "gpu-resident";
    case Tier::Endpoint: return "endpoint";
  }
  return "unknown";
}

std::string_view to_string(ParallelDim d) {
  switch (d) {
    case ParallelDim::TP: return "TP";
    case ParallelDim::PP: return "PP";
    case ParallelDim::DP: return "DP";
    case ParallelDim::EP: return "EP";
    case ParallelDim::EDP: return "EDP";
  }
  return "?";
}

std::size_t PortInventory::port_count() const {
  std::size_t n = 0;
  for (const auto& [tier, ids] : tiers) n += ids.size();
  return n;
}

Rate PortInventory::tier_rate(Tier t, const std::vector<Port>& ports) const {
  auto it = tiers.find(t);
  if (it == tiers.end()) return 0.0;
  Rate sum = 0.0;
  for (PortId p : it->second) sum += ports[p].rate;
  return sum;
}

std::array<int, 3> TorusIndex::coord(GpuId g) const {
  return {g % dims[0], (g / dims[0]) % dims[1], g / (dims[0] * dims[1])};
}

GpuId TorusIndex::gpu_at(const std::array<int, 3>& c) const {
  return c[0] + dims[0] * (c[1] + dims[1] * c[2]);
}

std::array<int, 3> cubic_dims(int n) {
  if (n < 1) throw ConstructionError("cubic_dims: cluster size must be positive");
  std::array<int, 3> best{n, 1, 1};
  int best_spread = n;
  for (int a = 1; a <= n; ++a) {
    if (n % a != 0) continue;
    const int rest = n / a;
    for (int b = 1; b <= rest; ++b) {
      if (rest % b != 0) continue;
      const int c = rest / b;
      std::array<int, 3> d{a, b, c};
      std::sort(d.begin(), d.end(), std::greater<>());
      const int spread = d[0] - d[2];
      if (spread < best_spread || (spread == best_spread && d > best)) {
        best = d;
        best_spread = spread;
      }
    }
  }
  return best;
}

namespace {

void finalize_inventory(Topology& t) {
  t.inventory_slot.assign(t.ports.size(), -1);
  t.inventory_ports.clear();
  t.inventory.tiers.clear();
  t.inventory.total_rate = 0.0;
  for (const auto& p : t.ports) {
    if (p.tier == Tier::Endpoint) continue;
    t.inventory_slot[p.id] = static_cast<std::int32_t>(t.inventory_ports.size());
    t.inventory_ports.push_back(p.id);
    t.inventory.tiers[p.tier].push_back(p.id);
    t.inventory.total_rate += p.rate;
  }
}

NodeId add_node(Topology& t, NodeKind kind, std::int32_t index, std::int32_t group,
                std::int32_t plane = -1) {
  const auto id = static_cast<NodeId>(t.nodes.size());
  t.nodes.push_back({id, kind, index, group, plane});
  return id;
}

PortId add_port(Topology& t, NodeId src, NodeId dst, Rate rate, Tier tier,
                std::int32_t plane = -1) {
  const auto id = static_cast<PortId>(t.ports.size());
  t.ports.push_back({id, src, dst, rate, tier, plane});
  return id;
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

struct ClosShape {
  int leaf_down = 0;
  int leaf_up = 0;
};

ClosShape leaf_shape(const RailParams& p) {
  const int k = p.switch_radix;
  const int o = p.oversubscription;
  ClosShape s;
  if ((k * p.plane_count * o) % (o + 1) != 0 || k % (o + 1) != 0) {
    std::ostringstream os;
    os << "rail: radix " << k << " cannot be split " << o << ":1 between down and up ports";
    throw ConstructionError(os.str());
  }
  s.leaf_down = k * p.plane_count * o / (o + 1);
  s.leaf_up = k / (o + 1);
  return s;
}

void validate_rail(int n, const RailParams& p) {
  if (n < 1) throw ConstructionError("rail: cluster size must be positive");
  if (p.gpus_per_server < 1) throw ConstructionError("rail: gpus_per_server must be >= 1");
  if (n % p.gpus_per_server != 0) {
    std::ostringstream os;
    os << "rail: cluster size " << n << " is not divisible by " << p.gpus_per_server
       << " GPUs per server";
    throw ConstructionError(os.str());
  }
  if (p.switch_radix < 2 || p.switch_radix % 2 != 0) {
    throw ConstructionError("rail: switch radix must be even and >= 2");
  }
  if (p.plane_count < 1) throw ConstructionError("rail: plane count must be >= 1");
  if (!(p.tiered_ratio > 0.0)) throw ConstructionError("rail: tiered ratio must be positive");
  if (!(p.base_nic_rate > 0.0)) throw ConstructionError("rail: NIC rate must be positive");
  if (p.oversubscription < 1) throw ConstructionError("rail: oversubscription must be >= 1");
}

// Largest divisor of `of` that is <= cap (cap >= 1).
int largest_divisor_at_most(int of, int cap) {
  for (int d = std::min(of, cap); d >= 1; --d) {
    if (of % d == 0) return d;
  }
  return 1;
}

// Smallest divisor of `of` that is >= floor.
int smallest_divisor_at_least(int of, int floor) {
  for (int d = std::max(1, floor); d <= of; ++d) {
    if (of % d == 0) return d;
  }
  return of;
}

}  // namespace

Topology build_torus(int cluster_size, const TorusParams& params) {
  if (cluster_size < 1) throw ConstructionError("torus: cluster size must be positive");
  TorusParams p = params;
  if (p.dims == std::array<int, 3>{0, 0, 0}) {
    p.dims = cubic_dims(cluster_size);
    if (p.dims[2] < 2) {
      std::ostringstream os;
      os << "torus: cluster size " << cluster_size
         << " has no factorization into three dimensions of length >= 2";
      throw ConstructionError(os.str());
    }
  }
  for (int d : p.dims) {
    if (d < 1) throw ConstructionError("torus: dimension lengths must be >= 1");
  }
  if (static_cast<long long>(p.dims[0]) * p.dims[1] * p.dims[2] != cluster_size) {
    std::ostringstream os;
    os << "torus: dims " << p.dims[0] << "x" << p.dims[1] << "x" << p.dims[2]
       << " do not factor cluster size " << cluster_size;
    throw ConstructionError(os.str());
  }
  if (!(p.base_port_rate > 0.0)) throw ConstructionError("torus: port rate must be positive");
  if (p.boosted) {
    if (p.boosted->axis < 0 || p.boosted->axis > 2) {
      throw ConstructionError("torus: boosted axis must be 0, 1 or 2");
    }
    if (p.boosted->extra_ports < 0) {
      throw ConstructionError("torus: boosted axis cannot remove ports");
    }
  }

  Topology t;
  t.arch = ArchKind::Torus3D;
  t.gpu_count = cluster_size;
  t.torus_params = p;
  t.torus.dims = p.dims;
  for (int a = 0; a < 3; ++a) {
    const double ratio = (p.boosted && p.boosted->axis == a) ? p.boosted->ratio() : 1.0;
    t.torus.axis_rate[a] = p.base_port_rate * ratio;
  }
  t.nodes.reserve(2 * static_cast<std::size_t>(cluster_size));
  for (GpuId g = 0; g < cluster_size; ++g) add_node(t, NodeKind::Gpu, g, g);
  t.torus.first_switch = static_cast<NodeId>(t.nodes.size());
  for (GpuId g = 0; g < cluster_size; ++g) add_node(t, NodeKind::GpuResidentSwitch, g, g);
  t.gpu_node.resize(cluster_size);
  t.attachment.resize(cluster_size);
  for (GpuId g = 0; g < cluster_size; ++g) {
    t.gpu_node[g] = g;
    t.attachment[g] = t.torus.first_switch + g;
  }

  t.ports.reserve(6 * static_cast<std::size_t>(cluster_size));
  for (GpuId g = 0; g < cluster_size; ++g) {
    const auto c = t.torus.coord(g);
    for (int a = 0; a < 3; ++a) {
      for (bool positive : {true, false}) {
        auto n = c;
        const int len = p.dims[a];
        n[a] = (c[a] + (positive ? 1 : len - 1)) % len;
        add_port(t, t.torus.first_switch + g, t.torus.first_switch + t.torus.gpu_at(n),
                 t.torus.axis_rate[a], Tier::GpuResident);
      }
    }
  }
  finalize_inventory(t);
  return t;
}

int rail_tier_count(int cluster_size, const RailParams& params) {
  validate_rail(cluster_size, params);
  const int k = params.switch_radix;
  if (cluster_size <= k * params.plane_count) return 1;
  const auto shape = leaf_shape(params);
  const int leaves = ceil_div(cluster_size, shape.leaf_down);
  if (leaves <= k) return 2;
  const int pods = ceil_div(leaves, k / 2);
  if (pods <= k) return 3;
  std::ostringstream os;
  os << "rail: " << cluster_size << " GPUs exceed the three-tier limit of "
     << static_cast<long long>(shape.leaf_down) * (k / 2) * k << " for radix " << k
     << " with " << params.plane_count << " plane(s)";
  throw ConstructionError(os.str());
}

Topology build_rail(int cluster_size, const RailParams& params) {
  const int tiers = rail_tier_count(cluster_size, params);
  const int k = params.switch_radix;
  const int planes = params.plane_count;
  const int g_per_s = params.gpus_per_server;
  const int servers = cluster_size / g_per_s;
  const Rate nic_rate = params.base_nic_rate / planes;
  const Rate trunk_rate = params.base_nic_rate;
  const Rate intra_rate = params.base_nic_rate * params.tiered_ratio;

  Topology t;
  t.arch = ArchKind::RailOptimized;
  t.gpu_count = cluster_size;
  t.rail_params = params;
  t.rail.gpus_per_server = g_per_s;
  t.rail.servers = servers;

  t.gpu_node.resize(cluster_size);
  t.attachment.resize(cluster_size);
  for (GpuId g = 0; g < cluster_size; ++g) {
    t.gpu_node[g] = add_node(t, NodeKind::Gpu, g, g / g_per_s);
    t.attachment[g] = t.gpu_node[g];
  }
  for (int s = 0; s < servers; ++s) {
    t.rail.intra_switch.push_back(add_node(t, NodeKind::IntraServerSwitch, s, s));
  }
  t.rail.gpu_to_intra.resize(cluster_size);
  t.rail.intra_to_gpu.resize(cluster_size);
  for (GpuId g = 0; g < cluster_size; ++g) {
    const NodeId sw = t.rail.intra_switch[g / g_per_s];
    t.rail.gpu_to_intra[g] = add_port(t, t.gpu_node[g], sw, intra_rate, Tier::Endpoint);
    t.rail.intra_to_gpu[g] = add_port(t, sw, t.gpu_node[g], intra_rate, Tier::IntraServer);
  }

  // Rail order: within a group of servers that share leaves, same-index GPUs
  // are adjacent, so consecutive leaf ports serve one rail.
  const auto shape = tiers == 1 ? ClosShape{cluster_size, 0} : leaf_shape(params);
  const int servers_per_group = std::max(1, std::min(servers, shape.leaf_down));
  std::vector<GpuId> nic_order(cluster_size);
  std::iota(nic_order.begin(), nic_order.end(), 0);
  std::stable_sort(nic_order.begin(), nic_order.end(), [&](GpuId a, GpuId b) {
    const int sa = a / g_per_s, sb = b / g_per_s;
    const auto key = [&](GpuId g, int s) {
      return std::array<int, 3>{s / servers_per_group, g % g_per_s, s % servers_per_group};
    };
    return key(a, sa) < key(b, sb);
  });

  const int leaves = ceil_div(cluster_size, shape.leaf_down);
  for (int pl = 0; pl < planes; ++pl) {
    RailPlane plane;
    plane.tiers = tiers;
    plane.leaf_down_ports = shape.leaf_down;
    plane.leaf_up_ports = shape.leaf_up;
    plane.leaf_of_gpu.resize(cluster_size);
    plane.nic_port.resize(cluster_size);
    plane.leaf_down_port.resize(cluster_size);

    plane.leaves_per_pod = tiers == 3 ? k / 2 : leaves;
    plane.pod_count = ceil_div(leaves, plane.leaves_per_pod);
    for (int l = 0; l < leaves; ++l) {
      const int pod = l / plane.leaves_per_pod;
      plane.leaf_nodes.push_back(add_node(t, NodeKind::LeafSwitch, l, pod, pl));
      plane.pod_of_leaf.push_back(pod);
    }
    for (int i = 0; i < cluster_size; ++i) {
      const GpuId g = nic_order[i];
      const int l = i / shape.leaf_down;
      plane.leaf_of_gpu[g] = l;
      plane.nic_port[g] = add_port(t, t.gpu_node[g], plane.leaf_nodes[l], nic_rate,
                                   Tier::Endpoint, pl);
      plane.leaf_down_port[g] = add_port(t, plane.leaf_nodes[l], t.gpu_node[g], nic_rate,
                                         Tier::Leaf, pl);
    }

    plane.leaf_up.resize(leaves);
    plane.spine_to_leaf.resize(leaves);
    plane.spine_up.resize(plane.pod_count);
    plane.core_to_pod.resize(plane.pod_count);
    if (tiers >= 2) {
      // Spines per pod must divide the leaf uplink count for uniform wiring.
      const int up = shape.leaf_up;
      const int spines_per_pod =
          tiers == 2 ? smallest_divisor_at_least(up, ceil_div(leaves * up, k)) : up;
      std::vector<std::vector<NodeId>> pod_spines(plane.pod_count);
      for (int pod = 0; pod < plane.pod_count; ++pod) {
        for (int j = 0; j < spines_per_pod; ++j) {
          const auto idx = static_cast<std::int32_t>(plane.spine_nodes.size());
          pod_spines[pod].push_back(add_node(t, NodeKind::SpineSwitch, idx, pod, pl));
          plane.spine_nodes.push_back(pod_spines[pod].back());
        }
      }
      for (int l = 0; l < leaves; ++l) {
        const int pod = plane.pod_of_leaf[l];
        for (int u = 0; u < up; ++u) {
          const NodeId spine = pod_spines[pod][u % spines_per_pod];
          plane.leaf_up[l].push_back(
              add_port(t, plane.leaf_nodes[l], spine, trunk_rate, Tier::Leaf, pl));
          plane.spine_to_leaf[l].push_back(
              add_port(t, spine, plane.leaf_nodes[l], trunk_rate, Tier::Spine, pl));
        }
      }
      if (tiers == 3) {
        const int spine_up = k / 2;
        const int per_pod_up = spines_per_pod * spine_up;
        const int links = largest_divisor_at_most(per_pod_up, k / plane.pod_count);
        const int cores = per_pod_up / links;
        for (int c = 0; c < cores; ++c) {
          plane.core_nodes.push_back(add_node(t, NodeKind::CoreSwitch, c, -1, pl));
        }
        for (int pod = 0; pod < plane.pod_count; ++pod) {
          for (int c = 0; c < cores; ++c) {
            for (int j = 0; j < links; ++j) {
              const NodeId spine = pod_spines[pod][(c * links + j) % spines_per_pod];
              plane.spine_up[pod].push_back(
                  add_port(t, spine, plane.core_nodes[c], trunk_rate, Tier::Spine, pl));
              plane.core_to_pod[pod].push_back(
                  add_port(t, plane.core_nodes[c], spine, trunk_rate, Tier::Core, pl));
            }
          }
        }
      }
    }
    t.rail.planes.push_back(std::move(plane));
  }
  finalize_inventory(t);
  return t;
}

Rate port_inventory_total(const Topology& topology) { return topology.inventory.total_rate; }

Topology remap_torus_dimensions(const Topology& topology,
                                const std::vector<AxisAssignment>& assignment) {
  if (!topology.is_torus()) {
    throw PlacementError("remap_torus_dimensions: topology is not a torus");
  }
  if (assignment.size() > 3) {
    throw PlacementError("remap_torus_dimensions: at most three parallel dimensions");
  }
  std::array<bool, 3> used{false, false, false};
  std::array<int, 3> dims{0, 0, 0};
  long long product = 1;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto& a = assignment[i];
    if (a.axis < 0 || a.axis > 2) throw PlacementError("remap_torus_dimensions: bad axis");
    if (used[a.axis]) {
      throw PlacementError("remap_torus_dimensions: two parallel dimensions on one axis");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (assignment[j].dim == a.dim) {
        throw PlacementError("remap_torus_dimensions: parallel dimension assigned twice");
      }
    }
    if (a.group_size < 1) throw PlacementError("remap_torus_dimensions: empty group");
    used[a.axis] = true;
    dims[a.axis] = a.group_size;
    product *= a.group_size;
  }
  const int n = topology.gpu_count;
  if (product > n || n % product != 0) {
    std::ostringstream os;
    os << "remap_torus_dimensions: group sizes (product " << product
       << ") cannot tile a cluster of " << n;
    throw PlacementError(os.str());
  }
  int rest = static_cast<int>(n / product);
  for (int a = 0; a < 3; ++a) {
    if (!used[a]) {
      dims[a] = rest;
      rest = 1;
    }
  }
  if (rest != 1) {
    std::ostringstream os;
    os << "remap_torus_dimensions: group sizes (product " << product
       << ") do not cover a cluster of " << n;
    throw PlacementError(os.str());
  }
  if (dims == topology.torus.dims) return topology;
  TorusParams p = topology.torus_params;
  p.dims = dims;
  return build_torus(n, p);
}

}  // namespace sweff

// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sweff/types.hpp"

namespace sweff {

enum class ArchKind { Torus3D, RailOptimized };

enum class NodeKind {
  Gpu,
  IntraServerSwitch,
  LeafSwitch,
  SpineSwitch,
  CoreSwitch,
  GpuResidentSwitch,
};

// Switching tiers of the port inventory. Endpoint marks GPU NIC egress
// ports, which carry traffic but are not switch ports.
enum class Tier { Core, Spine, Leaf, IntraServer, GpuResident, Endpoint };

std::string_view to_string(ArchKind a);
std::string_view to_string(NodeKind k);
std::string_view to_string(Tier t);

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::Gpu;
  std::int32_t index = 0;  // position within its kind
  std::int32_t group = 0;  // server for GPUs/intra switches, pod for Clos switches
  std::int32_t plane = -1;
};

/// A directed link, identified by the egress port it leaves from.
struct Port {
  PortId id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  Rate rate = 0.0;
  Tier tier = Tier::Endpoint;
  std::int32_t plane = -1;
};

struct PortInventory {
  std::map<Tier, std::vector<PortId>> tiers;
  Rate total_rate = 0.0;

  std::size_t port_count() const;
  Rate tier_rate(Tier t, const std::vector<Port>& ports) const;
};

/// Extra ports along one axis. Each direction gains extra_ports/2 ports, so
/// the axis runs at (1 + extra_ports/2) times the base rate.
struct BoostedAxis {
  int axis = 0;
  int extra_ports = 0;

  double ratio() const { return 1.0 + extra_ports / 2.0; }
};

// 400 Gb/s in bytes per second.
inline constexpr Rate kDefaultLinkRate = 400e9 / 8.0;

struct TorusParams {
  std::array<int, 3> dims{0, 0, 0};  // zeros: choose the most cubic shape
  Rate base_port_rate = kDefaultLinkRate;
  std::optional<BoostedAxis> boosted;
};

struct RailParams {
  int gpus_per_server = 8;
  int switch_radix = 64;
  double tiered_ratio = 9.0;  // per-GPU intra:inter bandwidth
  int plane_count = 1;
  Rate base_nic_rate = kDefaultLinkRate;
  int oversubscription = 1;
};

struct TorusIndex {
  std::array<int, 3> dims{1, 1, 1};
  std::array<Rate, 3> axis_rate{0, 0, 0};
  NodeId first_switch = 0;  // resident switch of GPU g is first_switch + g

  std::array<int, 3> coord(GpuId g) const;
  GpuId gpu_at(const std::array<int, 3>& c) const;
  // Ports are laid out as 6 per GPU: (axis, direction) with + before -.
  static PortId port(GpuId g, int axis, bool positive) {
    return g * 6 + axis * 2 + (positive ? 0 : 1);
  }
};

/// One independent switching plane of a Rail-Optimized fabric.
///
/// Wiring is uniform: every leaf spreads its uplinks evenly over the spines
/// of its pod and every core spreads its downlinks evenly over pods. The flow
/// engine relies on this to aggregate ECMP traffic per leaf.
struct RailPlane {
  int tiers = 1;  // 1 = leaf only, 2 = leaf+spine, 3 = leaf+spine+core
  int leaf_down_ports = 0;
  int leaf_up_ports = 0;
  int leaves_per_pod = 0;
  std::vector<NodeId> leaf_nodes;
  std::vector<NodeId> spine_nodes;
  std::vector<NodeId> core_nodes;
  std::vector<std::int32_t> leaf_of_gpu;
  std::vector<PortId> nic_port;        // GPU -> leaf (endpoint)
  std::vector<PortId> leaf_down_port;  // leaf -> GPU
  std::vector<std::int32_t> pod_of_leaf;
  std::vector<std::vector<PortId>> leaf_up;        // per leaf
  std::vector<std::vector<PortId>> spine_to_leaf;  // per destination leaf
  std::vector<std::vector<PortId>> spine_up;       // per pod
  std::vector<std::vector<PortId>> core_to_pod;    // per destination pod
  int pod_count = 1;
};

struct RailIndex {
  int gpus_per_server = 8;
  int servers = 0;
  std::vector<PortId> gpu_to_intra;  // endpoint
  std::vector<PortId> intra_to_gpu;  // intra-server switch egress
  std::vector<NodeId> intra_switch;  // per server
  std::vector<RailPlane> planes;

  int server_of(GpuId g) const { return g / gpus_per_server; }
};

struct Topology {
  ArchKind arch = ArchKind::Torus3D;
  int gpu_count = 0;
  std::vector<Node> nodes;
  std::vector<Port> ports;
  std::vector<NodeId> gpu_node;  // GPU id -> node
  // Node where a GPU's traffic enters the switching fabric: the resident
  // switch on a torus, the GPU itself on a rail fabric.
  std::vector<NodeId> attachment;
  PortInventory inventory;
  std::vector<std::int32_t> inventory_slot;  // port -> slot, -1 if excluded
  std::vector<PortId> inventory_ports;       // slot -> port
  TorusParams torus_params;
  RailParams rail_params;
  TorusIndex torus;
  RailIndex rail;

  bool is_torus() const { return arch == ArchKind::Torus3D; }
  bool counts_as_forwarding(PortId p) const { return inventory_slot[p] >= 0; }
};

/// Most cubic factorization of n into three factors, largest first.
std::array<int, 3> cubic_dims(int n);

Topology build_torus(int cluster_size, const TorusParams& params);
Topology build_rail(int cluster_size, const RailParams& params);

/// Tier count the rail builder would choose, or an error naming the limit.
int rail_tier_count(int cluster_size, const RailParams& params);

Rate port_inventory_total(const Topology& topology);

enum class ParallelDim { TP, PP, DP, EP, EDP };

std::string_view to_string(ParallelDim d);

struct AxisAssignment {
  ParallelDim dim = ParallelDim::TP;
  int group_size = 1;
  int axis = 0;
};

/// Reshapes a torus so that each parallel dimension forms whole rings along
/// its own physical axis, with ring length equal to the group size. Axes
/// without an assignment absorb the remaining factor of the cluster size.
/// This models an ideal optical circuit switch: no rewiring cost, and the
/// per-GPU port complement (including any boosted axis) is unchanged.
Topology remap_torus_dimensions(const Topology& topology,
                                const std::vector<AxisAssignment>& assignment);

/// Plain-text description of nodes, ports, and tiers.
void write_topology(std::ostream& os, const Topology& topology);

}  // namespace sweff

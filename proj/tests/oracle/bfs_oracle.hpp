// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <vector>

#include "sweff/topology.hpp"

namespace oracle {

using PortFilter = std::function<bool(const sweff::Port&)>;

/// Per-hop ECMP over the raw port graph: BFS distances to the destination,
/// then at every node the arriving fraction splits evenly over all egress
/// ports that step one hop closer. GPU nodes never relay. Returns the
/// fraction of the pair's volume carried by each port.
std::map<sweff::PortId, double> ecmp_fractions(const sweff::Topology& t, sweff::GpuId src,
                                               sweff::GpuId dst, const PortFilter& allow = {});

/// Volume-weighted count of inventory ports a unit of traffic crosses.
double forwarding_count(const sweff::Topology& t, const std::map<sweff::PortId, double>& frac);

/// Bytes per port for an arbitrary list of (src, dst, bytes) demands.
struct Demand {
  sweff::GpuId src;
  sweff::GpuId dst;
  double bytes;
};
std::vector<double> route_demands(const sweff::Topology& t, const std::vector<Demand>& demands,
                                  const PortFilter& allow = {});

/// Only positive-direction torus links.
PortFilter positive_torus_ports(const sweff::Topology& t);

}  // namespace oracle

// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include <iomanip>
#include <ostream>

#include "sweff/topology.hpp"

namespace sweff {

void write_topology(std::ostream& os, const Topology& t) {
  const auto old_precision = os.precision(17);
  os << "sweff-topology 1\n";
  os << "arch " << to_string(t.arch) << "\n";
  os << "gpus " << t.gpu_count << "\n";
  if (t.is_torus()) {
    os << "dims " << t.torus.dims[0] << " " << t.torus.dims[1] << " " << t.torus.dims[2]
       << "\n";
  }
  for (const auto& n : t.nodes) {
    os << "node " << n.id << " " << to_string(n.kind) << " " << n.index << " " << n.group
       << " " << n.plane << "\n";
  }
  for (GpuId g = 0; g < t.gpu_count; ++g) {
    os << "attach " << g << " " << t.attachment[g] << "\n";
  }
  for (const auto& p : t.ports) {
    os << "port " << p.id << " " << p.src << " " << p.dst << " " << p.rate << " "
       << to_string(p.tier) << " " << p.plane << "\n";
  }
  for (const auto& [tier, ids] : t.inventory.tiers) {
    os << "tier " << to_string(tier) << " " << ids.size() << " "
       << t.inventory.tier_rate(tier, t.ports) << "\n";
  }
  os << "total-rate " << t.inventory.total_rate << "\n";
  os.precision(old_precision);
}

}  // namespace sweff

// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include "sweff/workload.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <utility>

namespace sweff {

std::string_view to_string(ModelKind m) {
  return m == ModelKind::Dense ? "dense" : "moe";
}

std::string_view to_string(ReferenceModel r) {
  return r == ReferenceModel::GPT3 ? "gpt3" : "deepseek-v3";
}

std::string ParallelismConfig::id() const {
  std::ostringstream os;
  if (model == ModelKind::Dense) {
    os << "dense-n" << cluster_size << "-d" << d << "-p" << p << "-t" << t;
  } else {
    os << "moe-n" << cluster_size << "-de" << d_e << "-p" << p << "-e" << e;
  }
  return os.str();
}

namespace {

bool is_pow2(long long v) { return v > 0 && (v & (v - 1)) == 0; }

std::vector<int> powers_up_to(int hi, int lo = 1) {
  std::vector<int> out;
  for (long long v = 1; v <= hi; v *= 2) {
    if (v >= lo) out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

bool satisfies_constraints(const ParallelismConfig& cfg, const EnumerationConstraints& c) {
  const int n = cfg.cluster_size;
  if (n <= 0) return false;
  if (cfg.p < c.min_pp || !is_pow2(cfg.p) || cfg.p * c.pp_divisor > n) return false;
  if (cfg.model == ModelKind::Dense) {
    if (!is_pow2(cfg.t) || cfg.t > c.gpus_per_server) return false;
    return static_cast<long long>(cfg.d) * cfg.p * cfg.t == n && cfg.d >= 1;
  }
  if (!is_pow2(cfg.e) || cfg.e < c.min_ep || cfg.e * c.ep_divisor > n) return false;
  return static_cast<long long>(cfg.d_e) * cfg.p * cfg.e == n && cfg.d_e >= 1 &&
         cfg.d_attn == cfg.d_e * cfg.e;
}

std::vector<ParallelismConfig> enumerate_configs(int cluster_size, ModelKind model,
                                                 const EnumerationConstraints& c) {
  std::vector<ParallelismConfig> out;
  if (cluster_size <= 0) return out;
  const int n = cluster_size;
  const auto pps = powers_up_to(n / std::max(1, c.pp_divisor), c.min_pp);
  if (model == ModelKind::Dense) {
    for (int t : powers_up_to(c.gpus_per_server)) {
      for (int p : pps) {
        if (n % (p * t) != 0) continue;
        ParallelismConfig cfg;
        cfg.model = model;
        cfg.cluster_size = n;
        cfg.t = t;
        cfg.p = p;
        cfg.d = n / (p * t);
        if (satisfies_constraints(cfg, c)) out.push_back(cfg);
      }
    }
  } else {
    for (int e : powers_up_to(n / std::max(1, c.ep_divisor), c.min_ep)) {
      for (int p : pps) {
        if (n % (p * e) != 0) continue;
        ParallelismConfig cfg;
        cfg.model = model;
        cfg.cluster_size = n;
        cfg.e = e;
        cfg.p = p;
        cfg.d_e = n / (p * e);
        cfg.d_attn = cfg.d_e * e;
        if (satisfies_constraints(cfg, c)) out.push_back(cfg);
      }
    }
  }
  // (t or e, p) ascending already gives d descending; sort to pin the order.
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const int ka = a.model == ModelKind::Dense ? a.t : a.e;
    const int kb = b.model == ModelKind::Dense ? b.t : b.e;
    if (ka != kb) return ka < kb;
    if (a.p != b.p) return a.p < b.p;
    const int da = a.model == ModelKind::Dense ? a.d : a.d_e;
    const int db = b.model == ModelKind::Dense ? b.d : b.d_e;
    return da < db;
  });
  return out;
}

WorkloadSpec scale_workload(const ParallelismConfig& cfg, ReferenceModel reference,
                            const ScalingCoefficients& k) {
  if (reference_for(cfg.model) != reference) {
    throw ConfigError("reference model " + std::string(to_string(reference)) +
                      " does not match a " + std::string(to_string(cfg.model)) + " layout");
  }
  if (k.dtype_bytes <= 0 || k.microbatches <= 0) {
    throw ConfigError("dtype_bytes and microbatches must be positive");
  }
  WorkloadSpec w;
  w.config = cfg;
  w.reference = reference;
  w.dtype_bytes = k.dtype_bytes;
  w.microbatches = k.microbatches;
  const double dt = k.dtype_bytes;
  const double m = k.microbatches;

  if (reference == ReferenceModel::GPT3) {
    if (!k.gpt3) throw ConfigError("no scaling coefficients for gpt3");
    const auto& c = *k.gpt3;
    if (c.layers_per_pp <= 0 || c.hidden_per_tp <= 0 || c.samples_per_dp <= 0 ||
        c.seq_len <= 0 || c.tp_collectives_per_layer < 0) {
      throw ConfigError("gpt3 coefficients must be positive");
    }
    w.layers = static_cast<long long>(c.layers_per_pp) * cfg.p;
    w.hidden = static_cast<long long>(c.hidden_per_tp) * cfg.t;
    w.batch = static_cast<long long>(c.samples_per_dp) * cfg.d;
    w.sequence_len = c.seq_len;
    const double layers_local = c.layers_per_pp;
    const double activation = double(c.samples_per_dp) * c.seq_len * double(w.hidden) * dt;
    w.tp_activation_bytes = c.tp_collectives_per_layer * layers_local * activation;
    w.pp_activation_bytes = activation / m;
    const double h = double(w.hidden);
    w.dp_gradient_bytes = dt * 12.0 * h * h * layers_local / cfg.t;
    return w;
  }

  if (!k.deepseek_v3) throw ConfigError("no scaling coefficients for deepseek-v3");
  const auto& c = *k.deepseek_v3;
  if (c.hidden <= 0 || c.layers_per_pp <= 0 || c.experts_per_ep <= 0 || c.expert_ffn <= 0 ||
      c.samples_per_dp <= 0 || c.seq_len <= 0 || c.attention_params_per_hidden_sq <= 0) {
    throw ConfigError("deepseek-v3 coefficients must be positive");
  }
  w.layers = static_cast<long long>(c.layers_per_pp) * cfg.p;
  w.hidden = c.hidden;
  w.experts = static_cast<long long>(c.experts_per_ep) * cfg.e;
  w.routed_experts = std::max(1, cfg.e / 2);
  w.batch = static_cast<long long>(c.samples_per_dp) * cfg.d_attn;
  w.sequence_len = c.seq_len;
  w.include_edp = c.include_edp;
  const double layers_local = c.layers_per_pp;
  const double h = c.hidden;
  const double tokens = double(c.samples_per_dp) * c.seq_len * h * dt;
  // Forward and backward each run one dispatch and one combine per layer.
  w.a2a_token_bytes = 2.0 * layers_local * tokens;
  w.pp_activation_bytes = tokens / m;
  w.dp_gradient_bytes = dt * c.attention_params_per_hidden_sq * h * h * layers_local;
  w.edp_gradient_bytes = dt * c.experts_per_ep * 3.0 * h * c.expert_ffn * layers_local;
  return w;
}

void write_workload_suite(std::ostream& os, const std::vector<WorkloadSpec>& suite) {
  const auto old = os.precision(17);
  os << "# sweff-suite 1\n";
  os << "# id\treference\td\tp\tt\te\td_e\td_attn\tlayers\thidden\texperts\trouted"
        "\tbatch\tseq\tdtype\tmicrobatches\ttp_bytes\tpp_bytes\tdp_bytes\ta2a_bytes"
        "\tedp_bytes\n";
  for (const auto& w : suite) {
    const auto& c = w.config;
    os << w.id() << '\t' << to_string(w.reference) << '\t' << c.d << '\t' << c.p << '\t' << c.t
       << '\t' << c.e << '\t' << c.d_e << '\t' << c.d_attn << '\t' << w.layers << '\t'
       << w.hidden << '\t' << w.experts << '\t' << w.routed_experts << '\t' << w.batch << '\t'
       << w.sequence_len << '\t' << w.dtype_bytes << '\t' << w.microbatches << '\t'
       << w.tp_activation_bytes << '\t' << w.pp_activation_bytes << '\t' << w.dp_gradient_bytes
       << '\t' << w.a2a_token_bytes << '\t' << w.edp_gradient_bytes << '\n';
  }
  os.precision(old);
}

const std::vector<std::vector<GpuId>>& GroupLayout::of(ParallelDim d) const {
  auto it = groups.find(d);
  if (it == groups.end()) {
    throw PlacementError("layout has no " + std::string(to_string(d)) + " groups");
  }
  return it->second;
}

int dominant_axis(const ParallelismConfig& cfg) {
  if (cfg.model == ModelKind::Dense && cfg.t == 1) return 1;
  return 0;
}

std::vector<AxisAssignment> torus_assignment(const ParallelismConfig& cfg) {
  if (cfg.model == ModelKind::Dense) {
    return {{ParallelDim::TP, cfg.t, 0}, {ParallelDim::PP, cfg.p, 1}, {ParallelDim::DP, cfg.d, 2}};
  }
  return {{ParallelDim::EP, cfg.e, 0}, {ParallelDim::PP, cfg.p, 1}, {ParallelDim::EDP, cfg.d_e, 2}};
}

std::vector<std::pair<int, int>> snake_cycle(int a, int b) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(a) * b);
  if (a == 1 || b == 1) {
    for (int z = 0; z < b; ++z)
      for (int x = 0; x < a; ++x) out.emplace_back(x, z);
    return out;
  }
  if (b % 2 == 0) {
    for (int z = 0; z < b; ++z) {
      if (z % 2 == 0) {
        for (int x = 1; x < a; ++x) out.emplace_back(x, z);
      } else {
        for (int x = a - 1; x >= 1; --x) out.emplace_back(x, z);
      }
    }
    for (int z = b - 1; z >= 0; --z) out.emplace_back(0, z);
    return out;
  }
  if (a % 2 == 0) {
    for (auto& [z, x] : snake_cycle(b, a)) out.emplace_back(x, z);
    return out;
  }
  for (int z = 0; z < b; ++z)
    for (int x = 0; x < a; ++x) out.emplace_back(x, z);
  return out;
}

namespace {

using Groups = std::vector<std::vector<GpuId>>;

// Three logical coordinates (fast, mid, slow) mapped to GPU ids by a callback.
template <class F>
Groups groups_along(int fast, int mid, int slow, int which, F&& gpu) {
  Groups out;
  const int sizes[3] = {fast, mid, slow};
  const int len = sizes[which];
  const int o1 = which == 0 ? 1 : 0;
  const int o2 = which == 2 ? 1 : 2;
  for (int j = 0; j < sizes[o2]; ++j) {
    for (int i = 0; i < sizes[o1]; ++i) {
      std::vector<GpuId> g;
      g.reserve(len);
      for (int s = 0; s < len; ++s) {
        int c[3];
        c[which] = s;
        c[o1] = i;
        c[o2] = j;
        g.push_back(gpu(c[0], c[1], c[2]));
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace

PlacedWorkload place_groups(const ParallelismConfig& cfg,
                            std::shared_ptr<const Topology> topology) {
  if (!topology) throw PlacementError("no topology");
  const int n = topology->gpu_count;
  if (n != cfg.cluster_size) {
    throw PlacementError("layout " + cfg.id() + " needs " + std::to_string(cfg.cluster_size) +
                         " GPUs but the topology has " + std::to_string(n));
  }
  const bool dense = cfg.model == ModelKind::Dense;
  const int fast = dense ? cfg.t : cfg.e;
  const int slow = dense ? cfg.d : cfg.d_e;
  if (static_cast<long long>(fast) * cfg.p * slow != n) {
    throw PlacementError("layout " + cfg.id() + " does not tile the cluster");
  }
  const ParallelDim fast_dim = dense ? ParallelDim::TP : ParallelDim::EP;
  const ParallelDim slow_dim = dense ? ParallelDim::DP : ParallelDim::EDP;

  PlacedWorkload out;
  if (topology->is_torus()) {
    auto remapped = std::make_shared<Topology>(
        remap_torus_dimensions(*topology, torus_assignment(cfg)));
    const TorusIndex& ti = remapped->torus;
    auto gpu = [&](int x, int y, int z) { return ti.gpu_at({x, y, z}); };
    out.layout.groups[fast_dim] = groups_along(fast, cfg.p, slow, 0, gpu);
    out.layout.groups[ParallelDim::PP] = groups_along(fast, cfg.p, slow, 1, gpu);
    out.layout.groups[slow_dim] = groups_along(fast, cfg.p, slow, 2, gpu);
    if (!dense) {
      Groups attn;
      const auto cyc = snake_cycle(fast, slow);
      for (int y = 0; y < cfg.p; ++y) {
        std::vector<GpuId> g;
        g.reserve(cyc.size());
        for (auto [x, z] : cyc) g.push_back(gpu(x, y, z));
        attn.push_back(std::move(g));
      }
      out.layout.groups[ParallelDim::DP] = std::move(attn);
    }
    out.topology = std::move(remapped);
    return out;
  }

  if (dense && cfg.t > topology->rail.gpus_per_server) {
    throw PlacementError("TP degree " + std::to_string(cfg.t) + " exceeds the " +
                         std::to_string(topology->rail.gpus_per_server) + "-GPU server");
  }
  // Rank order: fast dimension innermost, then the slow (data) dimension,
  // then pipeline stage. GPU id equals rank.
  auto gpu = [&](int f, int s, int dd) {
    return static_cast<GpuId>(f + fast * (dd + slow * s));
  };
  out.layout.groups[fast_dim] = groups_along(fast, cfg.p, slow, 0, gpu);
  out.layout.groups[ParallelDim::PP] = groups_along(fast, cfg.p, slow, 1, gpu);
  out.layout.groups[slow_dim] = groups_along(fast, cfg.p, slow, 2, gpu);
  if (!dense) {
    Groups attn;
    const int block = fast * slow;
    for (int s = 0; s < cfg.p; ++s) {
      std::vector<GpuId> g(block);
      for (int i = 0; i < block; ++i) g[i] = static_cast<GpuId>(s * block + i);
      attn.push_back(std::move(g));
    }
    out.layout.groups[ParallelDim::DP] = std::move(attn);
  }
  out.topology = std::move(topology);
  return out;
}

}  // namespace sweff

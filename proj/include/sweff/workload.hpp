// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sweff/topology.hpp"
#include "sweff/types.hpp"

namespace sweff {

enum class ModelKind { Dense, MoE };

std::string_view to_string(ModelKind m);

/// One hybrid-parallel layout. Dense uses (d, p, t); MoE uses (d_e, p, e)
/// for expert layers and (d_attn, p) for attention, with d_attn = d_e * e.
struct ParallelismConfig {
  ModelKind model = ModelKind::Dense;
  int cluster_size = 0;
  int d = 1;
  int p = 1;
  int t = 1;
  int e = 1;
  int d_e = 1;
  int d_attn = 1;

  std::string id() const;
  bool operator==(const ParallelismConfig&) const = default;
};

struct EnumerationConstraints {
  int gpus_per_server = 8;  // TP bound: one high-bandwidth domain
  int min_pp = 2;
  int pp_divisor = 16;  // p <= N / pp_divisor
  int min_ep = 2;
  int ep_divisor = 32;  // e <= N / ep_divisor
};

/// All power-of-two layouts that satisfy the constraints, ordered by
/// (t or e, p, d).
std::vector<ParallelismConfig> enumerate_configs(int cluster_size, ModelKind model,
                                                 const EnumerationConstraints& c = {});

bool satisfies_constraints(const ParallelismConfig& cfg, const EnumerationConstraints& c);

enum class ReferenceModel { GPT3, DeepSeekV3 };

std::string_view to_string(ReferenceModel r);

// GPT-3 analogue: the (., 8, 8) point has 96 layers and hidden 12288.
struct DenseCoefficients {
  int layers_per_pp = 12;
  int hidden_per_tp = 1536;
  int samples_per_dp = 128;
  int seq_len = 2048;
  int tp_collectives_per_layer = 4;  // forward and backward all-reduces
};

// DeepSeek-V3 analogue: fixed hidden size, one expert per EP rank.
struct MoeCoefficients {
  int hidden = 7168;
  int layers_per_pp = 8;
  int experts_per_ep = 1;
  int expert_ffn = 2048;
  int attention_params_per_hidden_sq = 4;
  int samples_per_dp = 16;
  int seq_len = 4096;
  bool include_edp = true;
};

struct ScalingCoefficients {
  std::optional<DenseCoefficients> gpt3 = DenseCoefficients{};
  std::optional<MoeCoefficients> deepseek_v3 = MoeCoefficients{};
  int dtype_bytes = 2;
  int microbatches = 8;
};

/// A scaled workload and the per-iteration tensor sizes its traffic uses.
/// All sizes are per GPU and already folded over layers and passes.
struct WorkloadSpec {
  ParallelismConfig config;
  ReferenceModel reference = ReferenceModel::GPT3;
  long long layers = 0;
  long long hidden = 0;
  long long experts = 0;
  long long routed_experts = 0;
  long long batch = 0;  // global samples per iteration
  long long sequence_len = 0;
  int dtype_bytes = 2;
  int microbatches = 1;
  bool include_edp = true;

  Bytes tp_activation_bytes = 0;   // D of the folded TP all-reduce
  Bytes pp_activation_bytes = 0;   // per microbatch, per stage boundary, per direction
  Bytes dp_gradient_bytes = 0;     // D of the DP (attention DP for MoE) all-reduce
  Bytes a2a_token_bytes = 0;       // D of the folded dispatch (and combine)
  Bytes edp_gradient_bytes = 0;    // D of the expert-DP all-reduce

  std::string id() const { return config.id(); }
};

WorkloadSpec scale_workload(const ParallelismConfig& cfg, ReferenceModel reference,
                            const ScalingCoefficients& coefficients);

inline ReferenceModel reference_for(ModelKind m) {
  return m == ModelKind::Dense ? ReferenceModel::GPT3 : ReferenceModel::DeepSeekV3;
}

/// Groups per parallel dimension, each in ring / chain order. For MoE the DP
/// entry holds the attention data-parallel groups.
/// Tab-separated suite listing: one row per workload with its degrees,
/// hyperparameters and derived tensor sizes.
void write_workload_suite(std::ostream& os, const std::vector<WorkloadSpec>& suite);

struct GroupLayout {
  std::map<ParallelDim, std::vector<std::vector<GpuId>>> groups;

  const std::vector<std::vector<GpuId>>& of(ParallelDim d) const;
  bool has(ParallelDim d) const { return groups.count(d) != 0; }
};

struct PlacedWorkload {
  std::shared_ptr<const Topology> topology;
  GroupLayout layout;
};

/// Torus axis carrying the traffic-dominant dimension: TP (or PP when t = 1)
/// for dense, EP for MoE.
int dominant_axis(const ParallelismConfig& cfg);

/// Axis assignment used on a torus: TP/EP on X, PP on Y, DP/EDP on Z.
std::vector<AxisAssignment> torus_assignment(const ParallelismConfig& cfg);

PlacedWorkload place_groups(const ParallelismConfig& cfg,
                            std::shared_ptr<const Topology> topology);

/// Cycle through an a x b torus plane in which consecutive entries (and the
/// last/first pair) are single hops. Falls back to row-major order when both
/// sides are odd.
std::vector<std::pair<int, int>> snake_cycle(int a, int b);

}  // namespace sweff

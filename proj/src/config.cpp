// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include "sweff/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sweff {

using nlohmann::json;

std::string_view to_string(ArchSelection a) {
  switch (a) {
    case ArchSelection::Torus: return "torus";
    case ArchSelection::Rail: return "rail";
    case ArchSelection::Both: return "both";
  }
  return "?";
}

std::string_view to_string(ModelSelection m) {
  switch (m) {
    case ModelSelection::Dense: return "dense";
    case ModelSelection::MoE: return "moe";
    case ModelSelection::Both: return "both";
  }
  return "?";
}

std::string_view to_string(SweepAxis s) {
  switch (s) {
    case SweepAxis::None: return "none";
    case SweepAxis::TieredRatio: return "tiered-ratio";
    case SweepAxis::ServerSize: return "server-size";
    case SweepAxis::INC: return "inc";
    case SweepAxis::ClusterScale: return "cluster-scale";
  }
  return "?";
}

ArchSelection parse_arch(std::string_view s) {
  if (s == "torus") return ArchSelection::Torus;
  if (s == "rail") return ArchSelection::Rail;
  if (s == "both") return ArchSelection::Both;
  throw ConfigError("unknown architecture '" + std::string(s) + "' (torus, rail, both)");
}

ModelSelection parse_model(std::string_view s) {
  if (s == "dense") return ModelSelection::Dense;
  if (s == "moe") return ModelSelection::MoE;
  if (s == "both") return ModelSelection::Both;
  throw ConfigError("unknown model '" + std::string(s) + "' (dense, moe, both)");
}

SweepAxis parse_sweep(std::string_view s) {
  for (SweepAxis a : {SweepAxis::None, SweepAxis::TieredRatio, SweepAxis::ServerSize,
                      SweepAxis::INC, SweepAxis::ClusterScale}) {
    if (s == to_string(a)) return a;
  }
  throw ConfigError("unknown sweep axis '" + std::string(s) +
                    "' (none, tiered-ratio, server-size, inc, cluster-scale)");
}

Weighting parse_weighting(std::string_view s) {
  if (s == "duration") return Weighting::Duration;
  if (s == "equal") return Weighting::Equal;
  throw ConfigError("unknown weighting '" + std::string(s) + "' (duration, equal)");
}

std::vector<double> default_sweep_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return {};
    case SweepAxis::TieredRatio: return {1, 3, 5, 7, 9, 11, 13, 15, 17};
    case SweepAxis::ServerSize: return {8, 16, 32, 64, 128, 256};
    case SweepAxis::INC: return {0, 1};
    case SweepAxis::ClusterScale: return {512, 1024, 2048, 4096, 8192, 16384, 32768, 65536};
  }
  return {};
}

std::vector<double> effective_sweep_values(const ExperimentConfig& cfg) {
  return cfg.sweep_values.empty() ? default_sweep_values(cfg.sweep) : cfg.sweep_values;
}

namespace {

using Handlers = std::map<std::string, std::function<void(const json&)>>;

void apply(const json& obj, const std::string& where, const Handlers& h) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    auto f = h.find(it.key());
    if (f == h.end()) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    try {
      f->second(it.value());
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + it.key() + "' in " + where + ": " + e.what());
    }
  }
}

template <class T>
std::function<void(const json&)> to(T& field) {
  return [&field](const json& v) { field = v.get<T>(); };
}

json to_json(const ExperimentConfig& c) {
  const auto& d = c.coefficients.gpt3;
  const auto& m = c.coefficients.deepseek_v3;
  json j;
  j["cluster_size"] = c.cluster_size;
  j["arch"] = std::string(to_string(c.arch));
  j["model"] = std::string(to_string(c.models));
  j["weighting"] = std::string(to_string(c.weighting));
  j["inc"] = c.inc;
  j["out"] = c.out_dir;
  j["jobs"] = c.jobs;
  j["sweep"] = {{"axis", std::string(to_string(c.sweep))},
                {"values", c.sweep_values},
                {"planes", c.plane_counts}};
  j["torus"] = {{"dims", c.torus.dims}, {"port_rate", c.torus.base_port_rate}};
  j["rail"] = {{"gpus_per_server", c.rail.gpus_per_server},
               {"switch_radix", c.rail.switch_radix},
               {"tiered_ratio", c.rail.tiered_ratio},
               {"planes", c.rail.plane_count},
               {"nic_rate", c.rail.base_nic_rate},
               {"oversubscription", c.rail.oversubscription}};
  j["constraints"] = {{"gpus_per_server", c.constraints.gpus_per_server},
                      {"min_pp", c.constraints.min_pp},
                      {"pp_divisor", c.constraints.pp_divisor},
                      {"min_ep", c.constraints.min_ep},
                      {"ep_divisor", c.constraints.ep_divisor}};
  j["dtype_bytes"] = c.coefficients.dtype_bytes;
  j["microbatches"] = c.coefficients.microbatches;
  j["dense"] = d ? json{{"layers_per_pp", d->layers_per_pp},
                        {"hidden_per_tp", d->hidden_per_tp},
                        {"samples_per_dp", d->samples_per_dp},
                        {"seq_len", d->seq_len},
                        {"tp_collectives_per_layer", d->tp_collectives_per_layer}}
                 : json(nullptr);
  j["moe"] = m ? json{{"hidden", m->hidden},
                      {"layers_per_pp", m->layers_per_pp},
                      {"experts_per_ep", m->experts_per_ep},
                      {"expert_ffn", m->expert_ffn},
                      {"attention_params_per_hidden_sq", m->attention_params_per_hidden_sq},
                      {"samples_per_dp", m->samples_per_dp},
                      {"seq_len", m->seq_len},
                      {"include_edp", m->include_edp}}
               : json(nullptr);
  return j;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, ExperimentConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Handlers top{
      {"cluster_size", to(c.cluster_size)},
      {"arch", [&](const json& v) { c.arch = parse_arch(v.get<std::string>()); }},
      {"model", [&](const json& v) { c.models = parse_model(v.get<std::string>()); }},
      {"weighting", [&](const json& v) { c.weighting = parse_weighting(v.get<std::string>()); }},
      {"inc", to(c.inc)},
      {"out", to(c.out_dir)},
      {"jobs", to(c.jobs)},
      {"dtype_bytes", to(c.coefficients.dtype_bytes)},
      {"microbatches", to(c.coefficients.microbatches)},
      {"sweep",
       [&](const json& v) {
         apply(v, "sweep",
               {{"axis", [&](const json& a) { c.sweep = parse_sweep(a.get<std::string>()); }},
                {"values", to(c.sweep_values)},
                {"planes", to(c.plane_counts)}});
       }},
      {"torus",
       [&](const json& v) {
         apply(v, "torus", {{"dims", to(c.torus.dims)}, {"port_rate", to(c.torus.base_port_rate)}});
       }},
      {"rail",
       [&](const json& v) {
         apply(v, "rail",
               {{"gpus_per_server", to(c.rail.gpus_per_server)},
                {"switch_radix", to(c.rail.switch_radix)},
                {"tiered_ratio", to(c.rail.tiered_ratio)},
                {"planes", to(c.rail.plane_count)},
                {"nic_rate", to(c.rail.base_nic_rate)},
                {"oversubscription", to(c.rail.oversubscription)}});
       }},
      {"constraints",
       [&](const json& v) {
         auto& k = c.constraints;
         apply(v, "constraints",
               {{"gpus_per_server", to(k.gpus_per_server)},
                {"min_pp", to(k.min_pp)},
                {"pp_divisor", to(k.pp_divisor)},
                {"min_ep", to(k.min_ep)},
                {"ep_divisor", to(k.ep_divisor)}});
       }},
      {"dense",
       [&](const json& v) {
         if (v.is_null()) {
           c.coefficients.gpt3.reset();
           return;
         }
         auto& d = c.coefficients.gpt3;
         if (!d) d.emplace();
         apply(v, "dense",
               {{"layers_per_pp", to(d->layers_per_pp)},
                {"hidden_per_tp", to(d->hidden_per_tp)},
                {"samples_per_dp", to(d->samples_per_dp)},
                {"seq_len", to(d->seq_len)},
                {"tp_collectives_per_layer", to(d->tp_collectives_per_layer)}});
       }},
      {"moe",
       [&](const json& v) {
         if (v.is_null()) {
           c.coefficients.deepseek_v3.reset();
           return;
         }
         auto& m = c.coefficients.deepseek_v3;
         if (!m) m.emplace();
         apply(v, "moe",
               {{"hidden", to(m->hidden)},
                {"layers_per_pp", to(m->layers_per_pp)},
                {"experts_per_ep", to(m->experts_per_ep)},
                {"expert_ffn", to(m->expert_ffn)},
                {"attention_params_per_hidden_sq", to(m->attention_params_per_hidden_sq)},
                {"samples_per_dp", to(m->samples_per_dp)},
                {"seq_len", to(m->seq_len)},
                {"include_edp", to(m->include_edp)}});
       }},
  };
  apply(j, "config", top);
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void validate_config(const ExperimentConfig& c) {
  if (c.cluster_size < 1) throw ConfigError("cluster_size must be positive");
  if (c.jobs < 0) throw ConfigError("jobs must be >= 0");
  if (c.out_dir.empty()) throw ConfigError("out must not be empty");
  if (c.plane_counts.empty()) throw ConfigError("sweep.planes must not be empty");
  for (int p : c.plane_counts) {
    if (p < 1) throw ConfigError("plane counts must be >= 1");
  }
  for (double v : c.sweep_values) {
    if (!(v > 0.0) && !(c.sweep == SweepAxis::INC && v == 0.0)) {
      throw ConfigError("sweep values must be positive");
    }
  }
  if (c.sweep == SweepAxis::None && !c.sweep_values.empty()) {
    throw ConfigError("sweep values given without a sweep axis");
  }
  if (c.coefficients.dtype_bytes < 1 || c.coefficients.microbatches < 1) {
    throw ConfigError("dtype_bytes and microbatches must be >= 1");
  }
  if (c.rail.gpus_per_server < 1 || c.rail.switch_radix < 2 || c.rail.switch_radix % 2 != 0 ||
      c.rail.plane_count < 1 || !(c.rail.tiered_ratio > 0.0) || !(c.rail.base_nic_rate > 0.0) ||
      c.rail.oversubscription < 1) {
    throw ConfigError("invalid rail parameters");
  }
  if (!(c.torus.base_port_rate > 0.0)) throw ConfigError("torus port_rate must be positive");
  for (int d : c.torus.dims) {
    if (d < 0) throw ConfigError("torus dims must be >= 0");
  }
  const bool dense = c.models != ModelSelection::MoE;
  const bool moe = c.models != ModelSelection::Dense;
  if (dense && !c.coefficients.gpt3) throw ConfigError("dense model selected without coefficients");
  if (moe && !c.coefficients.deepseek_v3) {
    throw ConfigError("moe model selected without coefficients");
  }
}

std::string config_to_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

std::string config_hash(const ExperimentConfig& cfg) {
  // Output location and worker count do not change results.
  json j = to_json(cfg);
  j.erase("out");
  j.erase("jobs");
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sweff

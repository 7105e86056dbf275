// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include "sweff/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <thread>

#include "sweff/traffic.hpp"

namespace sweff {

int SuiteResult::failed_workloads() const {
  return static_cast<int>(
      std::count_if(workloads.begin(), workloads.end(), [](const auto& w) { return !w.ok; }));
}

int RunReport::failures() const {
  int n = 0;
  for (const auto& s : suites) n += (s.error.empty() ? 0 : 1) + s.failed_workloads();
  return n;
}

namespace {

std::shared_ptr<const Topology> torus_for(const SuitePoint& point, const ParallelismConfig& cfg) {
  TorusParams p = point.torus;
  for (const auto& a : torus_assignment(cfg)) p.dims[a.axis] = a.group_size;
  if (point.torus_ratio != 1.0) {
    const double extra = 2.0 * (point.torus_ratio - 1.0);
    if (extra < 0.0 || std::abs(extra - std::round(extra)) > 1e-9) {
      throw ConfigError("torus tiered ratio must be 1 + k/2 for a whole number of ports k");
    }
    p.boosted = BoostedAxis{dominant_axis(cfg), static_cast<int>(std::lround(extra))};
  }
  return std::make_shared<const Topology>(build_torus(point.cluster_size, p));
}

WorkloadResult evaluate_on(std::shared_ptr<const Topology> base, const SuitePoint& point,
                           const ParallelismConfig& cfg, const ExperimentConfig& ec) {
  WorkloadResult r;
  r.config = cfg;
  try {
    const WorkloadSpec w = scale_workload(cfg, reference_for(cfg.model), ec.coefficients);
    if (!base) base = point.arch == ArchKind::Torus3D
                          ? torus_for(point, cfg)
                          : std::make_shared<const Topology>(build_rail(point.cluster_size, point.rail));
    const PlacedWorkload placed = place_groups(cfg, base);
    ScheduleOptions opts;
    opts.inc = point.inc;
    const auto schedule = build_iteration_schedule(w, placed.layout, *placed.topology, opts);
    const auto ev = evaluate_workload(*placed.topology, schedule);
    r.metrics = ev.metrics;
    r.phases = ev.phases;
    r.ok = true;
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

template <class F>
void parallel_for(std::size_t count, int jobs, F&& body) {
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

WorkloadResult evaluate_config(const SuitePoint& point, const ParallelismConfig& cfg,
                               const ExperimentConfig& ec) {
  return evaluate_on(nullptr, point, cfg, ec);
}

std::optional<AggregatedMetrics> aggregate_suite(const std::vector<WorkloadResult>& workloads,
                                                 Weighting weighting) {
  std::vector<MetricsRecord> recs;
  std::vector<std::string> ids;
  for (const auto& w : workloads) {
    if (!w.ok) continue;
    recs.push_back(w.metrics);
    ids.push_back(w.id());
  }
  if (recs.empty()) return std::nullopt;
  return aggregate_metrics(recs, ids, weighting);
}

std::vector<SuiteResult> evaluate_points(const std::vector<SuitePoint>& points,
                                         const ExperimentConfig& ec) {
  std::vector<SuiteResult> out;
  out.reserve(points.size());
  for (const auto& pt : points) {
    SuiteResult s;
    s.experiment = pt.experiment;
    s.arch = pt.arch;
    s.model = pt.model;
    s.cluster_size = pt.cluster_size;
    s.sweep_value = pt.sweep_value;
    s.planes = pt.arch == ArchKind::RailOptimized ? pt.rail.plane_count : 1;
    s.variant = pt.variant;
    std::shared_ptr<const Topology> rail;
    try {
      if (pt.arch == ArchKind::RailOptimized) {
        rail = std::make_shared<const Topology>(build_rail(pt.cluster_size, pt.rail));
      }
    } catch (const Error& e) {
      s.error = e.what();
      out.push_back(std::move(s));
      continue;
    }
    const auto configs = enumerate_configs(pt.cluster_size, pt.model, ec.constraints);
    s.workloads.resize(configs.size());
    parallel_for(configs.size(), ec.jobs,
                 [&](std::size_t i) { s.workloads[i] = evaluate_on(rail, pt, configs[i], ec); });
    s.aggregate = aggregate_suite(s.workloads, ec.weighting);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::vector<ArchKind> archs_of(ArchSelection a) {
  switch (a) {
    case ArchSelection::Torus: return {ArchKind::Torus3D};
    case ArchSelection::Rail: return {ArchKind::RailOptimized};
    case ArchSelection::Both: return {ArchKind::Torus3D, ArchKind::RailOptimized};
  }
  return {};
}

std::vector<ModelKind> models_of(ModelSelection m) {
  switch (m) {
    case ModelSelection::Dense: return {ModelKind::Dense};
    case ModelSelection::MoE: return {ModelKind::MoE};
    case ModelSelection::Both: return {ModelKind::Dense, ModelKind::MoE};
  }
  return {};
}

SuitePoint base_point(const ExperimentConfig& cfg, const std::string& experiment, ArchKind arch,
                      ModelKind model) {
  SuitePoint p;
  p.experiment = experiment;
  p.arch = arch;
  p.model = model;
  p.cluster_size = cfg.cluster_size;
  p.torus = cfg.torus;
  p.rail = cfg.rail;
  p.inc = cfg.inc;
  p.variant = arch == ArchKind::Torus3D ? "torus" : "rail";
  return p;
}

}  // namespace

RunReport run_dissection(const ExperimentConfig& cfg) {
  validate_config(cfg);
  RunReport r;
  r.config = cfg;
  r.command = "dissect";
  std::vector<SuitePoint> points;
  for (ModelKind m : models_of(cfg.models))
    for (ArchKind a : archs_of(cfg.arch)) points.push_back(base_point(cfg, "dissect", a, m));
  r.suites = evaluate_points(points, cfg);
  return r;
}

RunReport run_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.sweep == SweepAxis::None) throw ConfigError("sweep needs an axis");
  const std::string name(to_string(cfg.sweep));
  const auto values = effective_sweep_values(cfg);
  std::vector<SuitePoint> points;
  for (ModelKind m : models_of(cfg.models)) {
    for (double v : values) {
      for (ArchKind a : archs_of(cfg.arch)) {
        SuitePoint p = base_point(cfg, name, a, m);
        p.sweep_value = v;
        switch (cfg.sweep) {
          case SweepAxis::TieredRatio:
            if (a == ArchKind::Torus3D) {
              p.torus_ratio = v;
            } else {
              p.rail.tiered_ratio = v;
            }
            points.push_back(p);
            break;
          case SweepAxis::ServerSize:
            if (a == ArchKind::Torus3D) break;  // a torus has no servers
            if (std::round(v) != v) throw ConfigError("server sizes must be whole numbers");
            p.rail.gpus_per_server = static_cast<int>(v);
            points.push_back(p);
            break;
          case SweepAxis::INC:
            p.inc = v != 0.0;
            points.push_back(p);
            break;
          case SweepAxis::ClusterScale:
            if (std::round(v) != v) throw ConfigError("cluster scales must be whole numbers");
            p.cluster_size = static_cast<int>(v);
            if (a == ArchKind::Torus3D) {
              points.push_back(p);
              break;
            }
            for (int planes : cfg.plane_counts) {
              SuitePoint q = p;
              q.rail.plane_count = planes;
              q.variant = "rail-p" + std::to_string(planes);
              points.push_back(q);
            }
            break;
          case SweepAxis::None:
            break;
        }
      }
    }
  }
  if (points.empty()) {
    throw ConfigError("sweep " + name + " has no points for architecture " +
                      std::string(to_string(cfg.arch)));
  }
  RunReport r;
  r.config = cfg;
  r.command = "sweep";
  r.suites = evaluate_points(points, cfg);
  return r;
}

}  // namespace sweff

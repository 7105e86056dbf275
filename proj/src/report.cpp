// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include "sweff/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sweff {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

std::string suite_key(const SuiteResult& s) {
  return s.experiment + "," + s.variant + "," + std::string(to_string(s.arch)) + "," +
         std::string(to_string(s.model)) + "," + std::to_string(s.cluster_size) + "," +
         num(s.sweep_value) + "," + std::to_string(s.planes);
}

const char* kSuiteHeader = "experiment,variant,arch,model,cluster_size,sweep_value,planes";

std::string workloads_csv(const RunReport& r) {
  std::ostringstream os;
  os << kSuiteHeader
     << ",workload,ok,gamma,delta,theta,theta_spatial,theta_temporal,mu,eta,"
        "effective_bytes,received_bytes,forwarded_bytes,capacity,duration_s,error\n";
  for (const auto& s : r.suites) {
    for (const auto& w : s.workloads) {
      const auto& m = w.metrics;
      os << suite_key(s) << ',' << w.id() << ',' << (w.ok ? 1 : 0);
      if (w.ok) {
        for (double v : {m.gamma, m.delta, m.theta, m.theta_spatial, m.theta_temporal, m.mu, m.eta,
                         m.effective_bytes, m.received_bytes, m.forwarded_bytes, m.capacity,
                         m.duration}) {
          os << ',' << num(v);
        }
      } else {
        os << std::string(12, ',');
      }
      os << ',' << csv_field(w.error) << '\n';
    }
  }
  return os.str();
}

std::string aggregates_csv(const RunReport& r) {
  std::ostringstream os;
  os << kSuiteHeader
     << ",workload,workloads,failed,gamma_bar,delta_bar,theta_bar,theta_spatial_bar,"
        "theta_temporal_bar,mu_bar,eta_bar,eta_bar_weighted,effective_bytes,received_bytes,"
        "forwarded_bytes,capacity_time,duration_s,error\n";
  for (const auto& s : r.suites) {
    os << suite_key(s) << ",ALL," << s.workloads.size() << ',' << s.failed_workloads();
    if (s.aggregate) {
      const auto& a = *s.aggregate;
      for (double v : {a.gamma_bar, a.delta_bar, a.theta_bar, a.theta_spatial_bar,
                       a.theta_temporal_bar, a.mu_bar, a.eta_bar, a.eta_bar_weighted,
                       a.effective_bytes, a.received_bytes, a.forwarded_bytes, a.capacity_time,
                       a.total_duration}) {
        os << ',' << num(v);
      }
    } else {
      os << std::string(13, ',');
    }
    os << ',' << csv_field(s.error) << '\n';
  }
  return os.str();
}

ordered_json metrics_json(const MetricsRecord& m) {
  return {{"gamma", m.gamma},
          {"delta", m.delta},
          {"theta", m.theta},
          {"theta_spatial", m.theta_spatial},
          {"theta_temporal", m.theta_temporal},
          {"mu", m.mu},
          {"eta", m.eta},
          {"effective_bytes", m.effective_bytes},
          {"received_bytes", m.received_bytes},
          {"forwarded_bytes", m.forwarded_bytes},
          {"capacity", m.capacity},
          {"active_capacity", m.active_capacity},
          {"duration_s", m.duration}};
}

std::string results_json(const RunReport& r) {
  ordered_json j;
  j["tool_version"] = std::string(kToolVersion);
  j["command"] = r.command;
  j["config_hash"] = config_hash(r.config);
  j["weighting"] = std::string(to_string(r.config.weighting));
  ordered_json suites = ordered_json::array();
  for (const auto& s : r.suites) {
    ordered_json sj;
    sj["experiment"] = s.experiment;
    sj["variant"] = s.variant;
    sj["arch"] = std::string(to_string(s.arch));
    sj["model"] = std::string(to_string(s.model));
    sj["cluster_size"] = s.cluster_size;
    sj["sweep_value"] = s.sweep_value;
    sj["planes"] = s.planes;
    if (!s.error.empty()) sj["error"] = s.error;
    ordered_json ws = ordered_json::array();
    for (const auto& w : s.workloads) {
      ordered_json wj;
      wj["id"] = w.id();
      wj["ok"] = w.ok;
      if (w.ok) {
        wj["metrics"] = metrics_json(w.metrics);
        ordered_json ph = ordered_json::array();
        for (const auto& p : w.phases) {
          ph.push_back({{"tag", std::string(to_string(p.tag))},
                        {"duration_s", p.duration},
                        {"effective_bytes", p.effective_bytes},
                        {"received_bytes", p.received_bytes},
                        {"forwarded_bytes", p.forwarded_bytes}});
        }
        wj["phases"] = std::move(ph);
      } else {
        wj["error"] = w.error;
      }
      ws.push_back(std::move(wj));
    }
    sj["workloads"] = std::move(ws);
    if (s.aggregate) {
      const auto& a = *s.aggregate;
      ordered_json weights = ordered_json::array();
      for (const auto& w : a.weights) {
        weights.push_back({{"id", w.workload_id}, {"lambda", w.lambda}, {"duration_s", w.duration}});
      }
      sj["aggregate"] = {{"eta_bar", a.eta_bar},
                         {"eta_bar_weighted", a.eta_bar_weighted},
                         {"gamma_bar", a.gamma_bar},
                         {"delta_bar", a.delta_bar},
                         {"theta_bar", a.theta_bar},
                         {"theta_spatial_bar", a.theta_spatial_bar},
                         {"theta_temporal_bar", a.theta_temporal_bar},
                         {"mu_bar", a.mu_bar},
                         {"capacity_time", a.capacity_time},
                         {"duration_s", a.total_duration},
                         {"weights", std::move(weights)}};
    }
    suites.push_back(std::move(sj));
  }
  j["suites"] = std::move(suites);
  return j.dump(2) + "\n";
}

// Plot-ready series: one row per point, columns named by metric.
struct Series {
  std::string name;
  std::string header;
  std::vector<std::string> rows;
};

void add_aggregate_series(std::map<std::string, Series>& out, const std::string& name,
                          const SuiteResult& s, const std::vector<std::string>& metrics) {
  auto& se = out[name];
  if (se.name.empty()) {
    se.name = name;
    se.header = "variant,sweep_value";
    for (const auto& m : metrics) se.header += "," + m;
  }
  std::string row = s.variant + "," + num(s.sweep_value);
  for (const auto& m : metrics) {
    row += ",";
    if (!s.aggregate) continue;
    const auto& a = *s.aggregate;
    if (m == "gamma_bar") row += num(a.gamma_bar);
    if (m == "delta_bar") row += num(a.delta_bar);
    if (m == "theta_bar") row += num(a.theta_bar);
    if (m == "mu_bar") row += num(a.mu_bar);
    if (m == "eta_bar") row += num(a.eta_bar);
  }
  se.rows.push_back(std::move(row));
}

std::map<std::string, Series> figure_series(const RunReport& r) {
  std::map<std::string, Series> out;
  for (const auto& s : r.suites) {
    const bool dense = s.model == ModelKind::Dense;
    if (s.experiment == "dissect") {
      auto& se = out[dense ? "fig5-dense" : "fig5-moe"];
      if (se.name.empty()) {
        se.name = dense ? "fig5-dense" : "fig5-moe";
        se.header = "variant,workload,gamma,delta,theta,mu,eta";
      }
      for (const auto& w : s.workloads) {
        if (!w.ok) continue;
        const auto& m = w.metrics;
        se.rows.push_back(s.variant + "," + w.id() + "," + num(m.gamma) + "," + num(m.delta) +
                          "," + num(m.theta) + "," + num(m.mu) + "," + num(m.eta));
      }
    } else if (s.experiment == "tiered-ratio") {
      add_aggregate_series(out, dense ? "fig6a" : "fig6b", s, {"theta_bar"});
    } else if (s.experiment == "server-size") {
      add_aggregate_series(out, "fig7a", s, {"delta_bar"});
      add_aggregate_series(out, "fig7b", s, {"theta_bar"});
      add_aggregate_series(out, "fig7c", s, {"mu_bar"});
    } else if (s.experiment == "inc") {
      add_aggregate_series(out, "fig8", s, {"gamma_bar", "eta_bar"});
    } else if (s.experiment == "cluster-scale") {
      add_aggregate_series(out, dense ? "fig9a" : "fig9b", s, {"eta_bar"});
    }
  }
  // Keep the variant-major order figures are drawn in.
  for (auto& [name, se] : out) {
    if (name.rfind("fig5", 0) == 0) continue;
    std::stable_sort(se.rows.begin(), se.rows.end(), [](const std::string& a, const std::string& b) {
      return a.substr(0, a.find(',')) < b.substr(0, b.find(','));
    });
  }
  return out;
}

std::string suite_listing(const RunReport& r) {
  std::vector<WorkloadSpec> suite;
  std::set<std::string> seen;
  for (const auto& s : r.suites) {
    for (const auto& w : s.workloads) {
      if (!seen.insert(w.id()).second) continue;
      try {
        suite.push_back(
            scale_workload(w.config, reference_for(w.config.model), r.config.coefficients));
      } catch (const ConfigError&) {
        // The workload row already carries the error.
      }
    }
  }
  std::ostringstream os;
  write_workload_suite(os, suite);
  return os.str();
}

}  // namespace

std::vector<std::string> emit_reports(const RunReport& report, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory " + dir + (ec ? ": " + ec.message() : ""));
  }
  const fs::path root(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(root / name, content);
    written.push_back(name);
  };
  emit("workloads.csv", workloads_csv(report));
  emit("aggregates.csv", aggregates_csv(report));
  emit("results.json", results_json(report));
  emit("workload-suite.tsv", suite_listing(report));
  fs::create_directories(root / "series", ec);
  if (ec) throw Error("cannot create " + (root / "series").string() + ": " + ec.message());
  for (const auto& [name, se] : figure_series(report)) {
    std::string body = se.header + "\n";
    for (const auto& row : se.rows) body += row + "\n";
    emit("series/" + name + ".csv", body);
  }

  ordered_json m;
  m["tool"] = "sweff";
  m["tool_version"] = std::string(kToolVersion);
  m["command"] = report.command;
  m["config_hash"] = config_hash(report.config);
  m["config"] = ordered_json::parse(config_to_json(report.config));
  m["suites"] = report.suites.size();
  m["failures"] = report.failures();
  m["files"] = written;
  write_file(root / "manifest.json", m.dump(2) + "\n");
  written.push_back("manifest.json");
  return written;
}

std::string make_run_directory(const std::string& root, const ExperimentConfig& cfg) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  const std::string base = (fs::path(root) / (config_hash(cfg) + "-" + stamp)).string();
  std::string dir = base;
  for (int i = 1; fs::exists(dir); ++i) dir = base + "-" + std::to_string(i);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

}  // namespace sweff

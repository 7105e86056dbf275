// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sweff/config.hpp"
#include "sweff/experiment.hpp"
#include "sweff/report.hpp"
#include "sweff/validation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct Flags {
  std::string config;
  std::optional<std::string> arch;
  std::optional<int> scale;
  std::optional<std::string> model;
  std::optional<std::string> sweep;
  std::optional<std::string> out;
  std::optional<std::string> weighting;
  std::optional<int> jobs;
};

sweff::ExperimentConfig effective_config(const Flags& f) {
  sweff::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = sweff::load_config(f.config, cfg);
  if (f.arch) cfg.arch = sweff::parse_arch(*f.arch);
  if (f.scale) cfg.cluster_size = *f.scale;
  if (f.model) cfg.models = sweff::parse_model(*f.model);
  if (f.sweep) cfg.sweep = sweff::parse_sweep(*f.sweep);
  if (f.out) cfg.out_dir = *f.out;
  if (f.weighting) cfg.weighting = sweff::parse_weighting(*f.weighting);
  if (f.jobs) cfg.jobs = *f.jobs;
  sweff::validate_config(cfg);
  return cfg;
}

void print_summary(const sweff::RunReport& report) {
  for (const auto& s : report.suites) {
    std::printf("%-14s %-8s %-5s N=%-6d v=%-8g", s.experiment.c_str(), s.variant.c_str(),
                std::string(sweff::to_string(s.model)).c_str(), s.cluster_size, s.sweep_value);
    if (s.aggregate) {
      const auto& a = *s.aggregate;
      std::printf(" workloads=%zu failed=%d gamma=%.4f delta=%.4f theta=%.4f mu=%.4f eta=%.4f\n",
                  s.workloads.size(), s.failed_workloads(), a.gamma_bar, a.delta_bar, a.theta_bar,
                  a.mu_bar, a.eta_bar);
    } else {
      std::printf(" workloads=%zu failed=%d %s\n", s.workloads.size(), s.failed_workloads(),
                  s.error.empty() ? "no aggregate" : s.error.c_str());
    }
  }
}

int run_experiment(const sweff::ExperimentConfig& cfg, bool sweep) {
  const auto report = sweep ? sweff::run_sweep(cfg) : sweff::run_dissection(cfg);
  const std::string dir = sweff::make_run_directory(cfg.out_dir, cfg);
  sweff::emit_reports(report, dir);
  print_summary(report);
  std::printf("results: %s\n", dir.c_str());
  if (report.failures() > 0) {
    std::fprintf(stderr, "%d workload or point failures recorded\n", report.failures());
    return kExitPartial;
  }
  return kExitOk;
}

int run_validate() {
  int failed = 0;
  for (const auto& c : sweff::run_oracle_suite()) {
    const bool ok = c.pass();
    failed += ok ? 0 : 1;
    std::printf("%s  %-48s expected %s%.6g actual %.6g\n", ok ? "PASS" : "FAIL", c.name.c_str(),
                c.at_least ? ">= " : "", c.expected, c.actual);
  }
  return failed == 0 ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switching efficiency analysis for AI cluster networks"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--arch", f.arch, "torus, rail or both");
  app.add_option("--scale", f.scale, "cluster size in GPUs");
  app.add_option("--model", f.model, "dense, moe or both");
  app.add_option("--sweep", f.sweep, "tiered-ratio, server-size, inc or cluster-scale");
  app.add_option("--out", f.out, "output root directory");
  app.add_option("--weighting", f.weighting, "duration or equal");
  app.add_option("--jobs", f.jobs, "worker threads, 0 for all cores");

  auto* dissect = app.add_subcommand("dissect", "baseline dissection of every workload");
  auto* sweep = app.add_subcommand("sweep", "sweep one network parameter");
  auto* validate = app.add_subcommand("validate", "run the bottleneck oracle suite");
  auto* show = app.add_subcommand("show-config", "print the effective config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (validate->parsed()) return run_validate();
    const auto cfg = effective_config(f);
    if (show->parsed()) {
      std::cout << sweff::config_to_json(cfg) << '\n';
      return kExitOk;
    }
    if (sweep->parsed() && cfg.sweep == sweff::SweepAxis::None) {
      throw sweff::ConfigError("sweep needs --sweep or a sweep section in the config");
    }
    return run_experiment(cfg, !dissect->parsed());
  } catch (const sweff::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return kExitConfig;
  }
}

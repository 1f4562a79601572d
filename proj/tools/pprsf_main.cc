// Copyright 2026 The PPRSF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pprsf: experiment runner for the federated recommender simulator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "pprsf/common/error.h"
#include "pprsf/core/csv_io.h"
#include "pprsf/core/synthetic.h"
#include "pprsf/eval/harness.h"
#include "pprsf/experiment/config.h"
#include "pprsf/experiment/runner.h"

namespace {

using pprsf::ExitCode;

int code(ExitCode c) { return static_cast<int>(c); }

void print_verdict(const pprsf::VerdictReport& v) {
  std::printf("%-14s %10s %10s %10s  %s\n", "metric", "Sum", "FL", "gap",
              "verdict");
  for (const pprsf::MetricGap& g : v.gaps) {
    std::printf("%-14s %10.6f %10.6f %10.6f  %s\n", g.metric.c_str(),
                g.sum_value, g.fl_value, g.gap, g.pass ? "pass" : "FAIL");
  }
  std::printf("\n%s: Sum=%.6f FL=%.6f mean Local=%.6f", v.primary_metric.c_str(),
              v.p_sum, v.p_fl, v.mean_local);
  if (v.p_public_only) std::printf(" PublicOnly=%.6f", *v.p_public_only);
  std::printf("\ndelta=%.4f  gap %s\n", v.delta_threshold,
              v.delta_pass ? "within bound" : "EXCEEDS bound");
  std::printf("FL beats Local on %.1f%% of clients\n",
              100.0 * v.validity_fraction);
}

std::optional<pprsf::ExperimentConfig> load_config(const std::string& path) {
  const pprsf::ConfigValidation v = pprsf::validate_config(path);
  for (const std::string& msg : v.violations) {
    std::fprintf(stderr, "config: %s\n", msg.c_str());
  }
  return v.config;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw pprsf::Error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving federated recommender simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  bool enforce_delta = false;

  CLI::App* run = app.add_subcommand("run", "Run an experiment end to end");
  run->add_option("--config", config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* out_opt = run->add_option("--out", out_dir, "Output directory");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Override the seed");
  CLI::Option* threads_opt =
      run->add_option("--threads", threads, "Client simulation threads")
          ->check(CLI::PositiveNumber);
  run->add_flag("--enforce-delta", enforce_delta,
                "Exit with status 5 when the delta criterion fails");

  CLI::App* validate = app.add_subcommand("validate", "Check a config file");
  validate->add_option("--config", config_path, "Experiment config (JSON)")
      ->required();

  pprsf::SynthConfig synth_cfg;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  synth->add_option("--out", out_dir, "Output directory")->required();
  CLI::Option* synth_seed = synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--config", config_path,
                    "Take the synthetic settings from an experiment config");
  synth->add_option("--users", synth_cfg.num_users, "Number of users");
  synth->add_option("--items", synth_cfg.num_items, "Number of items");
  synth->add_option("--interactions", synth_cfg.interactions_per_user,
                    "Interactions per user");

  CLI::App* report =
      app.add_subcommand("report", "Re-render the verdict from stored metrics");
  report->add_option("--out", out_dir, "Directory holding a run's artifacts")
      ->required();
  double delta_override = -1.0;
  report->add_option("--delta", delta_override, "Override the delta threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::optional<pprsf::ExperimentConfig> cfg = load_config(config_path);
      if (!cfg) return code(ExitCode::kConfig);
      pprsf::RunOptions opts;
      if (*out_opt) opts.output_dir = out_dir;
      if (*seed_opt) opts.seed = seed;
      if (*threads_opt) opts.threads = threads;
      opts.enforce_delta = enforce_delta;
      const pprsf::ExperimentResult r = pprsf::run_experiment(*cfg, opts);
      print_verdict(r.verdict);
      std::printf("audited messages: %zu (%zu failed)\n", r.audit.messages,
                  r.audit.failed);
      std::printf("artifacts: %s\n", r.config.output_dir.string().c_str());
      return code(r.exit_code);
    }
    if (validate->parsed()) {
      const pprsf::ConfigValidation v = pprsf::validate_config(config_path);
      for (const std::string& msg : v.violations) std::printf("%s\n", msg.c_str());
      if (!v.ok()) return code(ExitCode::kConfig);
      std::printf("ok\n");
      return 0;
    }
    if (synth->parsed()) {
      std::uint64_t synth_seed_value = *synth_seed ? seed : 42;
      if (!config_path.empty()) {
        std::optional<pprsf::ExperimentConfig> cfg = load_config(config_path);
        if (!cfg) return code(ExitCode::kConfig);
        if (!cfg->synthetic) {
          std::fprintf(stderr, "config has no synthetic dataset section\n");
          return code(ExitCode::kConfig);
        }
        synth_cfg = *cfg->synthetic;
        if (!*synth_seed) synth_seed_value = cfg->seed;
      }
      const pprsf::Dataset data =
          pprsf::generate_synthetic(synth_cfg, synth_seed_value);
      const pprsf::DatasetPaths paths = pprsf::DatasetPaths::in_directory(out_dir);
      std::filesystem::create_directories(out_dir);
      pprsf::write_dataset(data, paths);
      std::printf("wrote %zu users, %zu items to %s\n",
                  data.public_store().size(), data.catalog().size(),
                  out_dir.c_str());
      return 0;
    }
    if (report->parsed()) {
      const std::filesystem::path dir(out_dir);
      const pprsf::MetricsReport fl =
          pprsf::metrics_from_json(read_json(dir / "metrics_fl.json"));
      const pprsf::MetricsReport sum =
          pprsf::metrics_from_json(read_json(dir / "metrics_sum.json"));
      const pprsf::MetricsReport local =
          pprsf::metrics_from_json(read_json(dir / "metrics_local.json"));
      const pprsf::MetricsReport public_only =
          pprsf::metrics_from_json(read_json(dir / "metrics_public_only.json"));
      double delta = delta_override;
      if (delta < 0.0) {
        delta = read_json(dir / "verdict.json").at("delta_threshold").get<double>();
      }
      const pprsf::VerdictReport v = pprsf::delta_precision_report(
          sum, fl, std::span<const pprsf::MetricsReport>(&local, 1), delta,
          &public_only);
      print_verdict(v);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return code(pprsf::exit_code_for(e));
  }
  return 0;
}

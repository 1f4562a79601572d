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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "pprsf/common/error.h"
#include "pprsf/core/csv_io.h"
#include "pprsf/experiment/config.h"
#include "pprsf/experiment/runner.h"
#include "test_support.h"

namespace pprsf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json minimal_config() {
  return json::parse(R"({
    "seed": 7,
    "output_dir": "out",
    "dataset": {"synthetic": {"N": 5, "M": 20, "d_item": 3, "d_pub": 2,
                              "d_pri": 2, "interactions_per_user": 8,
                              "exposure_temperature": 0.3}},
    "recall": {"epochs": 5},
    "ranking": {"feature_map": "concat", "batch_size": 4},
    "federation": {"rounds": 2, "early_stop_tolerance": 0},
    "serving": {"K": 6, "T": 3},
    "rerank": {"output_size": 3},
    "evaluation": {"negatives_per_positive": 5, "k_values": [1, 5],
                   "primary_k": 5}
  })");
}

ExperimentConfig parsed(const json& doc) {
  const ConfigValidation v = parse_config(doc);
  EXPECT_TRUE(v.ok()) << (v.violations.empty() ? "" : v.violations.front());
  return *v.config;
}

fs::path write_config(const std::string& name, const json& doc) {
  const fs::path dir = testing::scratch_dir(name);
  testing::write_file(dir / "config.json", doc.dump(2));
  return dir / "config.json";
}

ExperimentResult run_into(const ExperimentConfig& cfg, const fs::path& out,
                          std::optional<std::size_t> threads = std::nullopt) {
  RunOptions opts;
  opts.output_dir = out;
  opts.threads = threads;
  return run_experiment(cfg, opts);
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    files[entry.path().filename().string()] =
        testing::read_file(entry.path());
  }
  return files;
}

TEST(ValidateConfig, CommittedExampleIsClean) {
  const ConfigValidation v =
      validate_config(fs::path(PPRSF_SOURCE_DIR) / "configs" / "example.json");
  EXPECT_TRUE(v.ok());
  EXPECT_TRUE(v.violations.empty());
  ASSERT_TRUE(v.config.has_value());
  EXPECT_EQ(v.config->k, 20u);
  EXPECT_EQ(v.config->synthetic->num_items, 300u);
}

TEST(ValidateConfig, KAboveMAndTAboveKGiveTwoViolations) {
  json doc = minimal_config();
  doc["serving"] = {{"K", 25}, {"T", 30}};
  const ConfigValidation v = parse_config(doc);
  ASSERT_EQ(v.violations.size(), 2u);
  EXPECT_FALSE(v.config.has_value());
  EXPECT_NE(v.violations[0].find("serving.K"), std::string::npos);
  EXPECT_NE(v.violations[1].find("serving.T"), std::string::npos);
}

TEST(ValidateConfig, NegativeLearningRateNamesTheField) {
  json doc = minimal_config();
  doc["ranking"]["learning_rate"] = -0.1;
  const ConfigValidation v = parse_config(doc);
  ASSERT_EQ(v.violations.size(), 1u);
  EXPECT_NE(v.violations[0].find("ranking.learning_rate"), std::string::npos);
}

TEST(ValidateConfig, UnknownKeysAndTypeErrors) {
  json doc = minimal_config();
  doc["federation"]["roundz"] = 3;
  doc["federation"]["fraction"] = "all";
  const ConfigValidation v = parse_config(doc);
  EXPECT_EQ(v.violations.size(), 2u);
}

TEST(ValidateConfig, FileErrors) {
  const fs::path dir = testing::scratch_dir("cfg_files");
  testing::write_file(dir / "bad.json", "{ not json");
  const ConfigValidation v = validate_config(dir / "bad.json");
  EXPECT_FALSE(v.ok());
  EXPECT_THROW(validate_config(dir / "missing.json"), Error);
}

TEST(ValidateConfig, RoundTripsThroughJson) {
  const ExperimentConfig cfg = parsed(minimal_config());
  const ExperimentConfig back = parsed(to_json(cfg));
  EXPECT_EQ(to_json(back).dump(), to_json(cfg).dump());
}

TEST(RunExperiment, MinimalRunWritesAllArtifacts) {
  const fs::path out = testing::scratch_dir("minimal_run");
  const ExperimentResult r = run_into(parsed(minimal_config()), out);
  EXPECT_EQ(r.exit_code, ExitCode::kOk);
  ASSERT_EQ(r.rounds.size(), 2u);
  for (const char* name :
       {"metrics_fl.json", "metrics_sum.json", "metrics_public_only.json",
        "metrics_local.json", "verdict.json", "rounds.json",
        "audit_summary.json", "summary.json", "recommendations.json",
        "config.json", "recall_model.json"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  const json rounds = json::parse(testing::read_file(out / "rounds.json"));
  EXPECT_EQ(rounds.size(), 2u);
  EXPECT_EQ(r.audit.failed, 0u);
  EXPECT_EQ(r.audit.passed, r.audit.messages);
  EXPECT_GT(r.audit.messages, 0u);
  EXPECT_EQ(r.recommendations.size(), 5u);
  for (const UserRecommendation& u : r.recommendations) {
    EXPECT_LE(u.final_ids.size(), 3u);
  }
  EXPECT_FALSE(fs::exists(out / "error.json"));
}

TEST(RunExperiment, SummaryListsParseableArtifacts) {
  const fs::path out = testing::scratch_dir("summary_run");
  run_into(parsed(minimal_config()), out);
  const json summary = json::parse(testing::read_file(out / "summary.json"));
  ASSERT_TRUE(summary.contains("artifacts"));
  std::set<std::string> listed;
  for (const json& name : summary["artifacts"]) {
    const fs::path p = out / name.get<std::string>();
    ASSERT_TRUE(fs::exists(p)) << p;
    EXPECT_NO_THROW(json::parse(testing::read_file(p))) << p;
    listed.insert(name.get<std::string>());
  }
  for (const auto& [name, text] : read_dir(out)) {
    EXPECT_EQ(listed.count(name), 1u) << name << " not listed";
  }
}

TEST(RunExperiment, ReportsAreByteIdenticalAcrossRuns) {
  const ExperimentConfig cfg = parsed(minimal_config());
  const fs::path a = testing::scratch_dir("det");
  run_into(cfg, a);
  const auto fa = read_dir(a);
  run_into(cfg, testing::scratch_dir("det"));
  const auto fb = read_dir(a);
  ASSERT_EQ(fa.size(), fb.size());
  for (const auto& [name, text] : fa) EXPECT_EQ(text, fb.at(name)) << name;
}

TEST(RunExperiment, ThreadCountDoesNotChangeReports) {
  const ExperimentConfig cfg = parsed(minimal_config());
  const fs::path a = testing::scratch_dir("thr_1");
  const fs::path b = testing::scratch_dir("thr_4");
  run_into(cfg, a, 1);
  run_into(cfg, b, 4);
  const auto fa = read_dir(a);
  const auto fb = read_dir(b);
  ASSERT_EQ(fa.size(), fb.size());
  for (const auto& [name, text] : fa) {
    // The echoed config records the thread count itself.
    if (name == "config.json") continue;
    EXPECT_EQ(text, fb.at(name)) << name;
  }
}

TEST(RunExperiment, SeedOverrideChangesData) {
  const ExperimentConfig cfg = parsed(minimal_config());
  RunOptions opts;
  opts.write_artifacts = false;
  const ExperimentResult base = run_experiment(cfg, opts);
  opts.seed = 8;
  const ExperimentResult other = run_experiment(cfg, opts);
  EXPECT_EQ(other.config.seed, 8u);
  EXPECT_NE(base.split.fingerprint, other.split.fingerprint);
  EXPECT_TRUE(base.artifacts.empty());
}

TEST(RunExperiment, TAtLeastKIsLoadTimeError) {
  json doc = minimal_config();
  doc["serving"]["T"] = 6;
  EXPECT_FALSE(parse_config(doc).ok());
  // Bypassing validation still fails before any work is done.
  ExperimentConfig cfg = parsed(minimal_config());
  cfg.t = 6;
  const fs::path out = testing::scratch_dir("t_ge_k");
  try {
    run_into(cfg, out);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(exit_code_for(e), ExitCode::kConfig);
  }
  EXPECT_TRUE(fs::exists(out / "error.json"));
}

TEST(RunExperiment, EnforceDeltaSetsExitCode) {
  json doc = minimal_config();
  // A zero threshold cannot be met with a strict comparison.
  doc["evaluation"]["delta_threshold"] = 0.0;
  RunOptions opts;
  opts.write_artifacts = false;
  opts.enforce_delta = true;
  const ExperimentResult r = run_experiment(parsed(doc), opts);
  EXPECT_FALSE(r.verdict.delta_pass);
  EXPECT_EQ(r.exit_code, ExitCode::kDelta);
  opts.enforce_delta = false;
  EXPECT_EQ(run_experiment(parsed(doc), opts).exit_code, ExitCode::kOk);
}

TEST(ExitCodes, ExceptionMapping) {
  EXPECT_EQ(exit_code_for(PrivacyViolationError("x")), ExitCode::kAudit);
  EXPECT_EQ(exit_code_for(ConfigError("x")), ExitCode::kConfig);
  EXPECT_EQ(exit_code_for(DivergenceError("x")), ExitCode::kRuntime);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), ExitCode::kRuntime);
  EXPECT_EQ(static_cast<int>(ExitCode::kOk), 0);
  const std::set<int> codes = {
      static_cast<int>(ExitCode::kConfig), static_cast<int>(ExitCode::kRuntime),
      static_cast<int>(ExitCode::kAudit), static_cast<int>(ExitCode::kDelta)};
  EXPECT_EQ(codes.size(), 4u);
  EXPECT_EQ(codes.count(0), 0u);
}

int cli(const std::string& args) {
  const std::string cmd = std::string(PPRSF_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, RunValidateReport) {
  const fs::path cfg = write_config("cli_cfg", minimal_config());
  const fs::path out = testing::scratch_dir("cli_out");
  EXPECT_EQ(cli("validate --config " + cfg.string()), 0);
  EXPECT_EQ(cli("run --config " + cfg.string() + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "verdict.json"));
  EXPECT_EQ(cli("report --out " + out.string()), 0);
  EXPECT_EQ(cli("report --out " + out.string() + " --delta 0.5"), 0);
  EXPECT_EQ(cli("report --out " + (out / "nope").string()), 3);
}

TEST(Cli, ExitCodes) {
  json bad = minimal_config();
  bad["serving"]["T"] = 9;
  const fs::path bad_cfg = write_config("cli_bad", bad);
  EXPECT_EQ(cli("validate --config " + bad_cfg.string()), 2);
  EXPECT_EQ(cli("run --config " + bad_cfg.string()), 2);

  json strict = minimal_config();
  strict["evaluation"]["delta_threshold"] = 0.0;
  const fs::path strict_cfg = write_config("cli_strict", strict);
  const fs::path out = testing::scratch_dir("cli_strict_out");
  EXPECT_EQ(cli("run --config " + strict_cfg.string() + " --out " +
                out.string() + " --enforce-delta"),
            5);
  EXPECT_EQ(cli("run --config " + strict_cfg.string() + " --out " +
                out.string()),
            0);
  EXPECT_NE(cli("frobnicate"), 0);
}

TEST(Cli, SynthWritesLoadableCsv) {
  const fs::path out = testing::scratch_dir("cli_synth");
  ASSERT_EQ(cli("synth --out " + out.string() +
                " --users 6 --items 25 --interactions 5 --seed 3"),
            0);
  const Dataset d = load_dataset(DatasetPaths::in_directory(out));
  EXPECT_EQ(d.num_users(), 6u);
  EXPECT_EQ(d.num_items(), 25u);
  const fs::path again = testing::scratch_dir("cli_synth_again");
  ASSERT_EQ(cli("synth --out " + again.string() +
                " --users 6 --items 25 --interactions 5 --seed 3"),
            0);
  EXPECT_EQ(read_dir(out), read_dir(again));
}

TEST(RunExperiment, CsvDatasetRun) {
  const fs::path data_dir = testing::scratch_dir("csv_run_data");
  ASSERT_EQ(cli("synth --out " + data_dir.string() +
                " --users 5 --items 20 --interactions 8 --seed 4"),
            0);
  json doc = minimal_config();
  doc["dataset"] = {{"csv",
                     {{"catalog", (data_dir / "catalog.csv").string()},
                      {"public", (data_dir / "public.csv").string()},
                      {"interactions", (data_dir / "interactions.csv").string()},
                      {"private", (data_dir / "private.csv").string()}}}};
  const ConfigValidation v = parse_config(doc);
  ASSERT_TRUE(v.ok()) << v.violations.front();
  RunOptions opts;
  opts.write_artifacts = false;
  const ExperimentResult r = run_experiment(*v.config, opts);
  EXPECT_EQ(r.dataset.num_users(), 5u);
  EXPECT_EQ(r.audit.failed, 0u);

  doc["dataset"]["csv"]["private"] = (data_dir / "missing.csv").string();
  EXPECT_EQ(parse_config(doc).violations.size(), 1u);
}

}  // namespace
}  // namespace pprsf

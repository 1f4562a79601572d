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

#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pprsf/eval/harness.h"
#include "pprsf/eval/split.h"
#include "pprsf/experiment/config.h"
#include "pprsf/fed/protocol.h"

namespace pprsf {

enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kRuntime = 3,
  kAudit = 4,
  kDelta = 5,  // only with enforce_delta
};

// Maps an exception escaping run_experiment to the process exit status.
ExitCode exit_code_for(const std::exception& e);

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool enforce_delta = false;
  bool write_artifacts = true;
};

struct AuditSummary {
  std::size_t messages = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> by_kind;
  std::size_t bytes_up = 0;
  std::size_t bytes_down = 0;
};

struct CommunicationStats {
  double mean_candidate_push_bytes = 0.0;
  double mean_full_catalog_push_bytes = 0.0;
  double ratio = 0.0;  // candidate / full catalog
};

struct UserRecommendation {
  UserId user_id = 0;
  bool cold_start = false;
  std::vector<ItemId> requested;  // Top-T ids sent to the server
  std::vector<ItemId> final_ids;
};

struct ExperimentResult {
  ExperimentConfig config;
  Dataset dataset;
  EvalSplit split;
  RecallModel recall;
  std::vector<ClientState> clients;  // after federation
  RankingParams initial_params;
  RankingParams global_params;
  std::vector<RoundLog> rounds;
  std::vector<ArchivedMessage> serving_messages;
  MetricsReport fl;
  MetricsReport sum;
  MetricsReport public_only;
  MetricsReport local;
  VerdictReport verdict;
  AuditSummary audit;
  CommunicationStats communication;
  std::vector<UserRecommendation> recommendations;
  ExitCode exit_code = ExitCode::kOk;
  std::vector<std::filesystem::path> artifacts;
};

// End-to-end run: data, split, recall, federation, serving, baselines,
// evaluation and the verdict. Artifacts written so far are kept when a stage
// throws; an error.json records the failing stage.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const RunOptions& options = {});

// Size of a CandidatePush carrying the whole catalog for one user.
std::size_t full_catalog_push_bytes(const RecallModel& model, UserId user_id,
                                    const PublicData& data);

nlohmann::json rounds_to_json(const std::vector<RoundLog>& rounds);
nlohmann::json to_json(const AuditSummary& summary);

}  // namespace pprsf

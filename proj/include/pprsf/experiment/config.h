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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pprsf/core/csv_io.h"
#include "pprsf/core/featurize.h"
#include "pprsf/core/synthetic.h"
#include "pprsf/fed/protocol.h"
#include "pprsf/recall/recall_model.h"
#include "pprsf/rerank/rerank.h"

namespace pprsf {

struct EvalConfig {
  std::size_t holdout_per_user = 1;
  std::size_t negatives_per_positive = 99;
  std::vector<std::size_t> k_values = {1, 5, 10};
  std::size_t primary_k = 10;
  double delta_threshold = 0.05;
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  // Exactly one of these is set.
  std::optional<SynthConfig> synthetic;
  std::optional<DatasetPaths> csv;
  RecallHyper recall;
  FeatureMap feature_map = FeatureMap::kConcatWithCrosses;
  FedConfig federation;  // federation.rank holds the local ranking hyper
  std::size_t k = 20;    // candidates per user
  std::size_t t = 5;     // Top-T request length
  RerankPolicy rerank;
  EvalConfig eval;
  std::filesystem::path output_dir = "out";
};

struct ConfigValidation {
  std::optional<ExperimentConfig> config;  // set iff violations is empty
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// Collects every violation rather than stopping at the first. Relative CSV
// paths resolve against base_dir.
ConfigValidation parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});

// Throws Error when the file cannot be read.
ConfigValidation validate_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace pprsf

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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pprsf/core/featurize.h"
#include "pprsf/eval/split.h"
#include "pprsf/fed/ranking_params.h"
#include "pprsf/ranker/client_ranker.h"

namespace pprsf {

struct ScoredItem {
  ItemId item_id = 0;
  double probability = 0.5;
};

// Given a user and that user's evaluation pool, returns the pool ordered
// best-first with a relevance probability per item. Throwing, or returning
// anything other than a permutation of the pool, marks the user as failed.
using RankingSystem =
    std::function<std::vector<ScoredItem>(UserId, std::span<const ItemId>)>;

struct UserMetric {
  UserId user_id = 0;
  double value = 0.0;

  friend bool operator==(const UserMetric&, const UserMetric&) = default;
};

struct MetricsReport {
  std::string system_label;  // FL, Sum, PublicOnly, Local
  std::string split_fingerprint;
  std::vector<std::size_t> k_values;
  std::size_t primary_k = 10;
  std::map<std::size_t, double> precision_at_k;
  std::map<std::size_t, double> recall_at_k;
  std::map<std::size_t, double> ndcg_at_k;
  double log_loss = 0.0;
  std::size_t n_users_evaluated = 0;
  std::size_t n_users_failed = 0;
  // NDCG@primary_k per evaluated user, ascending user_id.
  std::vector<UserMetric> per_user_primary;

  double primary() const { return ndcg_at_k.at(primary_k); }
};

// Macro-averages per-user metrics over split.users (or one user when
// `only_user` is set). primary_k is added to k_values when missing. Throws
// EmptyEvaluationError when every user fails.
MetricsReport evaluate_system(const std::string& label,
                              const RankingSystem& system,
                              const EvalSplit& split,
                              std::vector<std::size_t> k_values,
                              std::size_t primary_k = 10,
                              std::optional<UserId> only_user = std::nullopt);

// Scores pool items with a shared logistic model. With use_private false the
// private block is zeroed, matching how the public-only model was trained.
RankingSystem make_model_system(const RankingParams& params,
                                const Dataset& dataset, FeatureMap map,
                                bool use_private);

// One model per user; users without a model fail.
RankingSystem make_per_user_system(
    std::unordered_map<UserId, RankingParams> params, const Dataset& dataset,
    FeatureMap map);

// All clients' candidate examples pooled in client order. With use_private
// false the private block is zeroed.
std::vector<LabeledExample> pooled_training_set(
    std::span<const ClientState> clients, bool use_private);

// Central trainer over the pooled examples: same model, featurization,
// candidates and SGD settings, run for `epochs` passes from `init`.
RankingParams train_centralized(std::span<const ClientState> clients,
                                const RankHyper& hyper, std::size_t epochs,
                                const RankingParams& init,
                                std::uint64_t shuffle_seed, bool use_private);

// The oracle upper bound: private features visible to one trainer.
inline RankingParams train_centralized_sum(std::span<const ClientState> clients,
                                           const RankHyper& hyper,
                                           std::size_t epochs,
                                           const RankingParams& init,
                                           std::uint64_t shuffle_seed) {
  return train_centralized(clients, hyper, epochs, init, shuffle_seed, true);
}

// local_train iterated `rounds` times from `init` with no aggregation, using
// the same per-round shuffle seeds the federation would give this client.
RankingParams train_local_only(const ClientState& client,
                               const RankHyper& hyper, std::size_t rounds,
                               const RankingParams& init);

struct MetricGap {
  std::string metric;  // e.g. "ndcg@10"
  double sum_value = 0.0;
  double fl_value = 0.0;
  double gap = 0.0;  // |sum - fl|
  bool pass = false;  // gap < delta
};

struct ClientComparison {
  UserId user_id = 0;
  double fl_value = 0.0;
  double local_value = 0.0;
};

struct VerdictReport {
  std::string split_fingerprint;
  double delta_threshold = 0.05;
  std::size_t primary_k = 10;
  std::string primary_metric;
  std::vector<MetricGap> gaps;
  bool delta_pass = false;  // primary metric gap < delta
  double p_sum = 0.0;
  double p_fl = 0.0;
  double mean_local = 0.0;
  std::optional<double> p_public_only;
  bool fl_exceeds_mean_local = false;
  std::optional<bool> fl_exceeds_public_only;
  // Fraction of clients with P_FL > P_i on the primary metric.
  double validity_fraction = 0.0;
  std::vector<ClientComparison> clients;
};

// Throws IncomparableReportsError when the reports were computed on different
// splits or metric settings.
VerdictReport delta_precision_report(
    const MetricsReport& p_sum, const MetricsReport& p_fl,
    std::span<const MetricsReport> p_locals, double delta_threshold,
    const MetricsReport* p_public_only = nullptr);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VerdictReport& report);

}  // namespace pprsf

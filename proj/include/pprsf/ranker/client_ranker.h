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
#include <optional>
#include <span>
#include <vector>

#include "pprsf/core/dataset.h"
#include "pprsf/core/featurize.h"
#include "pprsf/fed/message.h"
#include "pprsf/fed/ranking_params.h"
#include "pprsf/recall/recall_model.h"

namespace pprsf {

struct RankHyper {
  std::size_t local_epochs = 1;
  std::size_t batch_size = 8;
  double learning_rate = 0.1;
  double l2_reg = 1e-4;
};

void validate(const RankHyper& hyper);

// Everything one simulated device holds. Nothing in here is ever handed to
// the server; the protocol only sees what local_train / select_top_t return.
struct ClientState {
  UserId user_id = 0;
  Dims dims;
  FeatureMap feature_map = FeatureMap::kConcat;
  PrivateShard private_shard;
  std::vector<double> public_features;
  std::vector<Interaction> own_interactions;
  CandidateSet candidates;
  RankingParams local_params;
  std::uint64_t rng_seed = 0;

  // Copies the user's public record and private shard out of the dataset.
  static ClientState from_dataset(const Dataset& dataset, UserId user_id,
                                  FeatureMap map, std::uint64_t rng_seed);

  std::size_t param_dimension() const {
    return feature_dimension(dims, feature_map);
  }
  FeatureVector features_for(std::span<const double> item_features) const;
};

struct LabeledExample {
  FeatureVector x;
  double label = 0.0;  // 0 or 1
};

// sigmoid(params . x). Throws ShapeError on dimension mismatch.
double predict(const RankingParams& params, std::span<const double> x);

// mean_b (sigmoid(params . x_b) - y_b) x_b + l2_reg * params, with the bias
// coordinate left unregularized. Throws EmptyBatchError.
std::vector<double> local_gradient(const RankingParams& params,
                                   std::span<const LabeledExample> batch,
                                   double l2_reg);

// One example per candidate: label 1 iff the candidate is among the user's
// own interactions with feedback >= 0.5.
std::vector<LabeledExample> build_training_set(const ClientState& state);

// local_epochs passes of mini-batch SGD, theta -= learning_rate * gradient.
// The example order is reshuffled at the start of every epoch from one
// stream seeded with shuffle_seed. Throws DivergenceError on a non-finite
// parameter.
RankingParams sgd_train(RankingParams start,
                        std::span<const LabeledExample> examples,
                        const RankHyper& hyper, std::uint64_t shuffle_seed);

struct LocalUpdate {
  RankingParams params;
  std::size_t sample_count = 0;
};

// Starts from the global parameters and runs local_epochs passes of
// mini-batch SGD over the shuffled training set. Returns nullopt when the
// client has no candidates (it sits the round out). Throws DivergenceError
// on a non-finite parameter.
std::optional<LocalUpdate> local_train(const RankingParams& global,
                                       const ClientState& state,
                                       const RankHyper& hyper,
                                       std::uint64_t shuffle_seed);
inline std::optional<LocalUpdate> local_train(const RankingParams& global,
                                              const ClientState& state,
                                              const RankHyper& hyper) {
  return local_train(global, state, hyper, state.rng_seed);
}

struct RankedEntry {
  ItemId item_id = 0;
  double probability = 0.0;
  double logit = 0.0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

struct RankedList {
  UserId user_id = 0;
  std::vector<RankedEntry> entries;  // non-increasing, ties by item_id
};

// Orders candidates by logit (hence by probability), ties by item_id.
RankedList local_rank(const RankingParams& params, const ClientState& state);

// Effective T for a list of size K: T itself when T < K, otherwise K - 1.
// Throws ConfigError for T <= 1.
std::size_t clamp_top_t(std::size_t t, std::size_t list_size);

// First T item ids of the ranked list, nothing else.
TopTRequestPayload select_top_t(const RankedList& ranked, std::size_t t);

}  // namespace pprsf

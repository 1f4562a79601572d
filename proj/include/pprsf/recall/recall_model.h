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
#include <map>
#include <unordered_map>
#include <vector>

#include "pprsf/core/dataset.h"

namespace pprsf {

struct RecallHyper {
  std::size_t rank = 8;  // latent dimension r
  double learning_rate = 0.05;
  double l2_reg = 0.001;
  std::size_t epochs = 40;
  std::size_t negative_samples_per_positive = 2;
};

void validate(const RecallHyper& hyper);

// Biased matrix factorization. Row u of user_factors belongs to user_ids[u],
// row i of item_factors to item_ids[i]. Scores are logits:
//   global_mean + user_bias[u] + item_bias[i] + <user_factors[u], item_factors[i]>
class RecallModel {
 public:
  RecallModel() = default;
  RecallModel(std::size_t rank, std::vector<UserId> user_ids,
              std::vector<ItemId> item_ids);

  std::size_t rank() const { return rank_; }
  const std::vector<UserId>& user_ids() const { return user_ids_; }
  const std::vector<ItemId>& item_ids() const { return item_ids_; }

  std::size_t user_row(UserId id) const;  // LookupError when unknown
  std::size_t item_row(ItemId id) const;
  bool has_user(UserId id) const { return user_row_.count(id) != 0; }

  std::span<double> user_factor(std::size_t row) {
    return {user_factors.data() + row * rank_, rank_};
  }
  std::span<const double> user_factor(std::size_t row) const {
    return {user_factors.data() + row * rank_, rank_};
  }
  std::span<double> item_factor(std::size_t row) {
    return {item_factors.data() + row * rank_, rank_};
  }
  std::span<const double> item_factor(std::size_t row) const {
    return {item_factors.data() + row * rank_, rank_};
  }

  double logit(std::size_t user_row, std::size_t item_row) const;
  double score(UserId user, ItemId item) const {
    return logit(user_row(user), item_row(item));
  }

  bool all_finite() const;

  std::vector<double> user_factors;  // N x r
  std::vector<double> item_factors;  // M x r
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  double global_mean = 0.0;
  std::map<ItemId, std::int64_t> popularity_table;

  friend bool operator==(const RecallModel& a, const RecallModel& b);

 private:
  void build_index();

  std::size_t rank_ = 0;
  std::vector<UserId> user_ids_;
  std::vector<ItemId> item_ids_;
  std::unordered_map<UserId, std::size_t> user_row_;
  std::unordered_map<ItemId, std::size_t> item_row_;
};

// Gradient of the single-example loss
//   (sigmoid(logit) - label)^2 + l2 * (|p_u|^2 + |q_i|^2 + b_u^2 + b_i^2)
// with respect to the parameters that example touches.
struct MfGradient {
  std::vector<double> user_factor;
  std::vector<double> item_factor;
  double user_bias = 0.0;
  double item_bias = 0.0;
};

double mf_example_loss(const RecallModel& model, std::size_t user_row,
                       std::size_t item_row, double label, double l2_reg);
MfGradient mf_example_gradient(const RecallModel& model, std::size_t user_row,
                               std::size_t item_row, double label,
                               double l2_reg);
// One SGD step: parameters -= learning_rate * gradient.
void mf_sgd_step(RecallModel& model, std::size_t user_row,
                 std::size_t item_row, double label, double l2_reg,
                 double learning_rate);

// Fits on the public interaction logs only. Positives are logged entries with
// feedback >= 0.5; each positive draws negative_samples_per_positive items
// the user never interacted with, without replacement. Throws ConfigError on
// bad hyperparameters and DivergenceError naming the epoch on a non-finite
// loss.
RecallModel train_recall(const PublicData& data, const RecallHyper& hyper,
                         std::uint64_t seed);
RecallModel train_recall(const Dataset& dataset, const RecallHyper& hyper,
                         std::uint64_t seed);

struct Candidate {
  ItemId item_id = 0;
  double recall_score = 0.0;
  std::vector<double> features;  // item content shipped to the client

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct CandidateSet {
  UserId user_id = 0;
  std::vector<Candidate> items;  // score non-increasing, ties by item_id
  // Fewer than K items were available; all of them are returned.
  bool degenerate = false;

  std::size_t size() const { return items.size(); }
  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

// Scores every catalog item for the user (skipping items in the user's log
// when exclude_seen) and keeps the top K. Throws ConfigError for K == 0 and
// LookupError for a user unknown to the model.
CandidateSet recall_top_k(const RecallModel& model, UserId user_id,
                          const PublicData& data, std::size_t k,
                          bool exclude_seen);

// Top K by popularity_count, ties by ascending item_id; the same list for
// every user (cold start and baseline source). Throws EmptyCatalogError.
CandidateSet popularity_top_k(const PublicData& data, std::size_t k);
std::vector<CandidateSet> popularity_recall(const PublicData& data,
                                            std::size_t k);

void save_recall_model(const RecallModel& model,
                       const std::filesystem::path& path);
RecallModel load_recall_model(const std::filesystem::path& path);

}  // namespace pprsf

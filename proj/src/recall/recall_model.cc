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

#include "pprsf/recall/recall_model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "pprsf/common/error.h"
#include "pprsf/common/numeric.h"
#include "pprsf/common/rng.h"

namespace pprsf {

namespace {

constexpr char kCheckpointFormat[] = "pprsf.recall_model";
constexpr int kCheckpointVersion = 1;

bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.recall_score != b.recall_score) return a.recall_score > b.recall_score;
  return a.item_id < b.item_id;
}

CandidateSet top_k(std::vector<Candidate> pool, std::size_t k, UserId user) {
  CandidateSet out;
  out.user_id = user;
  if (k >= pool.size()) {
    out.degenerate = k > pool.size();
    std::sort(pool.begin(), pool.end(), ranks_before);
    out.items = std::move(pool);
    return out;
  }
  std::partial_sort(pool.begin(), pool.begin() + static_cast<long>(k),
                    pool.end(), ranks_before);
  pool.resize(k);
  out.items = std::move(pool);
  return out;
}

}  // namespace

void validate(const RecallHyper& h) {
  if (h.rank < 1) throw ConfigError("recall.rank must be >= 1");
  if (h.epochs < 1) throw ConfigError("recall.epochs must be >= 1");
  if (!(h.learning_rate > 0.0) || !std::isfinite(h.learning_rate)) {
    throw ConfigError("recall.learning_rate must be > 0");
  }
  if (!(h.l2_reg >= 0.0) || !std::isfinite(h.l2_reg)) {
    throw ConfigError("recall.l2_reg must be >= 0");
  }
}

RecallModel::RecallModel(std::size_t rank, std::vector<UserId> user_ids,
                         std::vector<ItemId> item_ids)
    : user_factors(user_ids.size() * rank, 0.0),
      item_factors(item_ids.size() * rank, 0.0),
      user_bias(user_ids.size(), 0.0),
      item_bias(item_ids.size(), 0.0),
      rank_(rank),
      user_ids_(std::move(user_ids)),
      item_ids_(std::move(item_ids)) {
  build_index();
}

void RecallModel::build_index() {
  user_row_.clear();
  item_row_.clear();
  for (std::size_t i = 0; i < user_ids_.size(); ++i) {
    user_row_[user_ids_[i]] = i;
  }
  for (std::size_t i = 0; i < item_ids_.size(); ++i) {
    item_row_[item_ids_[i]] = i;
  }
}

std::size_t RecallModel::user_row(UserId id) const {
  auto it = user_row_.find(id);
  if (it == user_row_.end()) {
    throw LookupError("recall model has no user " + std::to_string(id));
  }
  return it->second;
}

std::size_t RecallModel::item_row(ItemId id) const {
  auto it = item_row_.find(id);
  if (it == item_row_.end()) {
    throw LookupError("recall model has no item " + std::to_string(id));
  }
  return it->second;
}

double RecallModel::logit(std::size_t u, std::size_t i) const {
  return global_mean + user_bias[u] + item_bias[i] +
         dot(user_factor(u), item_factor(i));
}

bool RecallModel::all_finite() const {
  return pprsf::all_finite(user_factors) && pprsf::all_finite(item_factors) &&
         pprsf::all_finite(user_bias) && pprsf::all_finite(item_bias) &&
         std::isfinite(global_mean);
}

bool operator==(const RecallModel& a, const RecallModel& b) {
  return a.rank_ == b.rank_ && a.user_ids_ == b.user_ids_ &&
         a.item_ids_ == b.item_ids_ && a.user_factors == b.user_factors &&
         a.item_factors == b.item_factors && a.user_bias == b.user_bias &&
         a.item_bias == b.item_bias && a.global_mean == b.global_mean &&
         a.popularity_table == b.popularity_table;
}

double mf_example_loss(const RecallModel& model, std::size_t u, std::size_t i,
                       double label, double l2_reg) {
  const double err = logistic(model.logit(u, i)) - label;
  auto sq = [](std::span<const double> v) { return dot(v, v); };
  const double reg = sq(model.user_factor(u)) + sq(model.item_factor(i)) +
                     model.user_bias[u] * model.user_bias[u] +
                     model.item_bias[i] * model.item_bias[i];
  return err * err + l2_reg * reg;
}

MfGradient mf_example_gradient(const RecallModel& model, std::size_t u,
                               std::size_t i, double label, double l2_reg) {
  const double p = logistic(model.logit(u, i));
  const double dlogit = 2.0 * (p - label) * p * (1.0 - p);
  const auto pu = model.user_factor(u);
  const auto qi = model.item_factor(i);
  MfGradient g;
  g.user_factor.resize(model.rank());
  g.item_factor.resize(model.rank());
  for (std::size_t f = 0; f < model.rank(); ++f) {
    g.user_factor[f] = dlogit * qi[f] + 2.0 * l2_reg * pu[f];
    g.item_factor[f] = dlogit * pu[f] + 2.0 * l2_reg * qi[f];
  }
  g.user_bias = dlogit + 2.0 * l2_reg * model.user_bias[u];
  g.item_bias = dlogit + 2.0 * l2_reg * model.item_bias[i];
  return g;
}

void mf_sgd_step(RecallModel& model, std::size_t u, std::size_t i,
                 double label, double l2_reg, double learning_rate) {
  const MfGradient g = mf_example_gradient(model, u, i, label, l2_reg);
  auto pu = model.user_factor(u);
  auto qi = model.item_factor(i);
  for (std::size_t f = 0; f < model.rank(); ++f) {
    pu[f] -= learning_rate * g.user_factor[f];
    qi[f] -= learning_rate * g.item_factor[f];
  }
  model.user_bias[u] -= learning_rate * g.user_bias;
  model.item_bias[i] -= learning_rate * g.item_bias;
}

RecallModel train_recall(const PublicData& data, const RecallHyper& hyper,
                         std::uint64_t seed) {
  validate(hyper);
  std::vector<UserId> user_ids;
  for (const auto& user : data.public_store()) user_ids.push_back(user.user_id);
  std::vector<ItemId> item_ids;
  for (const auto& item : data.catalog()) item_ids.push_back(item.item_id);
  RecallModel model(hyper.rank, std::move(user_ids), std::move(item_ids));

  Rng rng(seed);
  for (double& v : model.user_factors) v = rng.uniform(-0.01, 0.01);
  for (double& v : model.item_factors) v = rng.uniform(-0.01, 0.01);
  for (const auto& item : data.catalog()) {
    model.popularity_table[item.item_id] = item.popularity_count;
  }

  double feedback_sum = 0.0;
  std::size_t feedback_count = 0;
  struct Positive {
    std::size_t user_row;
    std::size_t item_row;
  };
  std::vector<Positive> positives;
  std::vector<std::vector<char>> seen(data.num_users(),
                                      std::vector<char>(data.num_items(), 0));
  std::vector<std::size_t> unseen_count(data.num_users(), data.num_items());
  for (std::size_t u = 0; u < data.num_users(); ++u) {
    for (const Interaction& e : data.public_store()[u].interaction_log) {
      feedback_sum += e.feedback;
      ++feedback_count;
      const std::size_t i = data.item_index(e.item_id);
      if (!seen[u][i]) {
        seen[u][i] = 1;
        --unseen_count[u];
      }
      if (e.positive()) positives.push_back({u, i});
    }
  }
  model.global_mean =
      feedback_count == 0 ? 0.0 : feedback_sum / static_cast<double>(feedback_count);

  std::vector<std::size_t> negatives;
  std::vector<char> drawn(data.num_items(), 0);
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(std::span<Positive>(positives));
    double epoch_loss = 0.0;
    for (const Positive& pos : positives) {
      epoch_loss += mf_example_loss(model, pos.user_row, pos.item_row, 1.0,
                                    hyper.l2_reg);
      mf_sgd_step(model, pos.user_row, pos.item_row, 1.0, hyper.l2_reg,
                  hyper.learning_rate);

      negatives.clear();
      const std::size_t available = unseen_count[pos.user_row];
      const auto& user_seen = seen[pos.user_row];
      if (available <= hyper.negative_samples_per_positive) {
        for (std::size_t i = 0; i < data.num_items(); ++i) {
          if (!user_seen[i]) negatives.push_back(i);
        }
      } else {
        while (negatives.size() < hyper.negative_samples_per_positive) {
          const std::size_t i = rng.uniform_index(data.num_items());
          if (user_seen[i] || drawn[i]) continue;
          drawn[i] = 1;
          negatives.push_back(i);
        }
        for (std::size_t i : negatives) drawn[i] = 0;
      }
      for (std::size_t i : negatives) {
        epoch_loss +=
            mf_example_loss(model, pos.user_row, i, 0.0, hyper.l2_reg);
        mf_sgd_step(model, pos.user_row, i, 0.0, hyper.l2_reg,
                    hyper.learning_rate);
      }
    }
    if (!std::isfinite(epoch_loss) || !model.all_finite()) {
      throw DivergenceError("recall training diverged at epoch " +
                            std::to_string(epoch));
    }
  }
  return model;
}

RecallModel train_recall(const Dataset& dataset, const RecallHyper& hyper,
                         std::uint64_t seed) {
  return train_recall(dataset.server_view(), hyper, seed);
}

CandidateSet recall_top_k(const RecallModel& model, UserId user_id,
                          const PublicData& data, std::size_t k,
                          bool exclude_seen) {
  if (k == 0) throw ConfigError("recall K must be >= 1");
  const std::size_t u = model.user_row(user_id);
  std::unordered_set<ItemId> seen;
  if (exclude_seen && data.has_user(user_id)) {
    for (const Interaction& e : data.user(user_id).interaction_log) {
      seen.insert(e.item_id);
    }
  }
  std::vector<Candidate> pool;
  pool.reserve(data.num_items());
  for (const ItemRecord& item : data.catalog()) {
    if (seen.count(item.item_id) != 0) continue;
    pool.push_back(Candidate{item.item_id,
                             model.logit(u, model.item_row(item.item_id)),
                             item.feature_vector});
  }
  return top_k(std::move(pool), k, user_id);
}

CandidateSet popularity_top_k(const PublicData& data, std::size_t k) {
  if (data.num_items() == 0) {
    throw EmptyCatalogError("popularity recall over an empty catalog");
  }
  if (k == 0) throw ConfigError("recall K must be >= 1");
  std::vector<Candidate> pool;
  pool.reserve(data.num_items());
  for (const ItemRecord& item : data.catalog()) {
    pool.push_back(Candidate{item.item_id,
                             static_cast<double>(item.popularity_count),
                             item.feature_vector});
  }
  return top_k(std::move(pool), k, 0);
}

std::vector<CandidateSet> popularity_recall(const PublicData& data,
                                            std::size_t k) {
  const CandidateSet shared = popularity_top_k(data, k);
  std::vector<CandidateSet> out;
  out.reserve(data.num_users());
  for (const auto& user : data.public_store()) {
    CandidateSet set = shared;
    set.user_id = user.user_id;
    out.push_back(std::move(set));
  }
  return out;
}

void save_recall_model(const RecallModel& model,
                       const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["rank"] = model.rank();
  j["num_users"] = model.user_ids().size();
  j["num_items"] = model.item_ids().size();
  j["user_ids"] = model.user_ids();
  j["item_ids"] = model.item_ids();
  j["user_factors"] = model.user_factors;
  j["item_factors"] = model.item_factors;
  j["user_bias"] = model.user_bias;
  j["item_bias"] = model.item_bias;
  j["global_mean"] = model.global_mean;
  nlohmann::json pop = nlohmann::json::array();
  for (const auto& [id, count] : model.popularity_table) {
    pop.push_back({id, count});
  }
  j["popularity_table"] = std::move(pop);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

RecallModel load_recall_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, 0, e.what());
  }
  try {
    if (j.at("format") != kCheckpointFormat ||
        j.at("version") != kCheckpointVersion) {
      throw ConfigError(path.string() + ": not a version-" +
                        std::to_string(kCheckpointVersion) +
                        " recall checkpoint");
    }
    const auto rank = j.at("rank").get<std::size_t>();
    RecallModel model(rank, j.at("user_ids").get<std::vector<UserId>>(),
                      j.at("item_ids").get<std::vector<ItemId>>());
    if (model.user_ids().size() != j.at("num_users").get<std::size_t>() ||
        model.item_ids().size() != j.at("num_items").get<std::size_t>()) {
      throw ShapeError(path.string() + ": declared dims disagree with ids");
    }
    model.user_factors = j.at("user_factors").get<std::vector<double>>();
    model.item_factors = j.at("item_factors").get<std::vector<double>>();
    model.user_bias = j.at("user_bias").get<std::vector<double>>();
    model.item_bias = j.at("item_bias").get<std::vector<double>>();
    model.global_mean = j.at("global_mean").get<double>();
    for (const auto& entry : j.at("popularity_table")) {
      model.popularity_table[entry.at(0).get<ItemId>()] =
          entry.at(1).get<std::int64_t>();
    }
    if (model.user_factors.size() != model.user_ids().size() * rank ||
        model.item_factors.size() != model.item_ids().size() * rank ||
        model.user_bias.size() != model.user_ids().size() ||
        model.item_bias.size() != model.item_ids().size()) {
      throw ShapeError(path.string() + ": factor shapes disagree with dims");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, 0, e.what());
  }
}

}  // namespace pprsf

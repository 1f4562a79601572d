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

#include "pprsf/ranker/client_ranker.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "pprsf/common/error.h"
#include "pprsf/common/numeric.h"
#include "pprsf/common/rng.h"

namespace pprsf {

void validate(const RankHyper& h) {
  if (h.local_epochs < 1) throw ConfigError("rank.local_epochs must be >= 1");
  if (h.batch_size < 1) throw ConfigError("rank.batch_size must be >= 1");
  if (!(h.learning_rate >= 0.0) || !std::isfinite(h.learning_rate)) {
    throw ConfigError("rank.learning_rate must be >= 0");
  }
  if (!(h.l2_reg >= 0.0) || !std::isfinite(h.l2_reg)) {
    throw ConfigError("rank.l2_reg must be >= 0");
  }
}

ClientState ClientState::from_dataset(const Dataset& dataset, UserId user_id,
                                      FeatureMap map, std::uint64_t rng_seed) {
  const PublicUserRecord& user = dataset.user(user_id);
  ClientState state;
  state.user_id = user_id;
  state.dims = dataset.dims();
  state.feature_map = map;
  state.private_shard = dataset.shard(user_id);
  state.public_features = user.public_features;
  state.own_interactions = user.interaction_log;
  state.candidates.user_id = user_id;
  state.rng_seed = rng_seed;
  return state;
}

FeatureVector ClientState::features_for(
    std::span<const double> item_features) const {
  return featurize(public_features,
                   std::span<const double>(private_shard.private_features),
                   item_features, dims, feature_map);
}

double predict(const RankingParams& params, std::span<const double> x) {
  if (x.size() != params.dimension()) {
    throw ShapeError("predict: feature length " + std::to_string(x.size()) +
                     " vs parameter length " +
                     std::to_string(params.dimension()));
  }
  return logistic(dot(params.weights, x));
}

std::vector<double> local_gradient(const RankingParams& params,
                                   std::span<const LabeledExample> batch,
                                   double l2_reg) {
  if (batch.empty()) throw EmptyBatchError("local_gradient: empty batch");
  const std::size_t d = params.dimension();
  std::vector<double> grad(d, 0.0);
  for (const LabeledExample& ex : batch) {
    const double residual = predict(params, ex.x) - ex.label;
    for (std::size_t j = 0; j < d; ++j) grad[j] += residual * ex.x[j];
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t j = 0; j < d; ++j) {
    grad[j] *= scale;
    if (j != params.bias_index()) grad[j] += l2_reg * params.weights[j];
  }
  return grad;
}

std::vector<LabeledExample> build_training_set(const ClientState& state) {
  std::unordered_set<ItemId> positives;
  for (const Interaction& e : state.own_interactions) {
    if (e.positive()) positives.insert(e.item_id);
  }
  std::vector<LabeledExample> out;
  out.reserve(state.candidates.size());
  for (const Candidate& c : state.candidates.items) {
    out.push_back(LabeledExample{state.features_for(c.features),
                                 positives.count(c.item_id) ? 1.0 : 0.0});
  }
  return out;
}

std::optional<LocalUpdate> local_train(const RankingParams& global,
                                       const ClientState& state,
                                       const RankHyper& hyper,
                                       std::uint64_t shuffle_seed) {
  validate(hyper);
  if (global.dimension() != state.param_dimension()) {
    throw ShapeError("local_train: global parameters have dimension " +
                     std::to_string(global.dimension()) + ", client expects " +
                     std::to_string(state.param_dimension()));
  }
  if (state.candidates.items.empty()) return std::nullopt;

  const std::vector<LabeledExample> examples = build_training_set(state);
  try {
    RankingParams theta = sgd_train(global, examples, hyper, shuffle_seed);
    return LocalUpdate{std::move(theta), examples.size()};
  } catch (const DivergenceError& e) {
    throw DivergenceError("client " + std::to_string(state.user_id) + ": " +
                          e.what());
  }
}

RankingParams sgd_train(RankingParams theta,
                        std::span<const LabeledExample> examples,
                        const RankHyper& hyper, std::uint64_t shuffle_seed) {
  validate(hyper);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<LabeledExample> batch;
  Rng rng(shuffle_seed);

  for (std::size_t epoch = 0; epoch < hyper.local_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size();
         start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(examples[order[k]]);
      }
      const std::vector<double> grad =
          local_gradient(theta, batch, hyper.l2_reg);
      for (std::size_t j = 0; j < theta.dimension(); ++j) {
        theta.weights[j] -= hyper.learning_rate * grad[j];
      }
    }
    if (!all_finite(theta.weights)) {
      throw DivergenceError("SGD diverged in epoch " +
                            std::to_string(epoch + 1));
    }
  }
  return theta;
}

RankedList local_rank(const RankingParams& params, const ClientState& state) {
  RankedList ranked;
  ranked.user_id = state.user_id;
  ranked.entries.reserve(state.candidates.size());
  for (const Candidate& c : state.candidates.items) {
    const FeatureVector x = state.features_for(c.features);
    if (x.size() != params.dimension()) {
      throw ShapeError("local_rank: parameter dimension mismatch");
    }
    const double z = dot(params.weights, x);
    ranked.entries.push_back(RankedEntry{c.item_id, logistic(z), z});
  }
  std::sort(ranked.entries.begin(), ranked.entries.end(),
            [](const RankedEntry& a, const RankedEntry& b) {
              if (a.logit != b.logit) return a.logit > b.logit;
              return a.item_id < b.item_id;
            });
  return ranked;
}

std::size_t clamp_top_t(std::size_t t, std::size_t list_size) {
  if (t <= 1) throw ConfigError("T must be > 1");
  if (t >= list_size) {
    const std::size_t clamped = list_size == 0 ? 0 : list_size - 1;
    spdlog::warn("T={} is not below the list size {}; clamping to {}", t,
                 list_size, clamped);
    return clamped;
  }
  return t;
}

TopTRequestPayload select_top_t(const RankedList& ranked, std::size_t t) {
  const std::size_t effective = clamp_top_t(t, ranked.entries.size());
  TopTRequestPayload payload;
  payload.item_ids.reserve(effective);
  for (std::size_t k = 0; k < effective; ++k) {
    payload.item_ids.push_back(ranked.entries[k].item_id);
  }
  return payload;
}

}  // namespace pprsf

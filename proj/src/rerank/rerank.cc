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

#include "pprsf/rerank/rerank.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "pprsf/common/error.h"
#include "pprsf/common/numeric.h"
#include "pprsf/recall/recall_model.h"

namespace pprsf {

void validate(const RerankPolicy& p) {
  if (!(p.diversity_lambda >= 0.0 && p.diversity_lambda <= 1.0)) {
    throw ConfigError("rerank.diversity_lambda must lie in [0, 1]");
  }
  if (!(p.freshness_weight >= 0.0) || !std::isfinite(p.freshness_weight)) {
    throw ConfigError("rerank.freshness_weight must be finite and >= 0");
  }
  if (!(p.popularity_weight >= 0.0) || !std::isfinite(p.popularity_weight)) {
    throw ConfigError("rerank.popularity_weight must be finite and >= 0");
  }
  if (p.output_size < 1) throw ConfigError("rerank.output_size must be >= 1");
}

double cosine_similarity(std::span<const double> a,
                         std::span<const double> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<ItemId> mmr_rerank(std::span<const RankedItem> items,
                               const FeatureLookup& features, double lambda,
                               std::size_t output_size) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("mmr_rerank: lambda must lie in [0, 1]");
  }
  if (output_size > items.size()) {
    spdlog::warn("mmr_rerank: output size {} exceeds {} items; clamping",
                 output_size, items.size());
    output_size = items.size();
  }
  const std::size_t n = items.size();
  std::vector<std::span<const double>> vectors;
  vectors.reserve(n);
  for (const RankedItem& item : items) vectors.push_back(features(item.item_id));

  std::vector<char> picked(n, 0);
  // Highest similarity of each item to anything picked so far.
  std::vector<double> max_sim(n, 0.0);
  std::vector<ItemId> out;
  out.reserve(output_size);
  while (out.size() < output_size) {
    std::size_t best = n;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (picked[k]) continue;
      const double relevance =
          1.0 / (static_cast<double>(items[k].base_rank) + 1.0);
      const double value = lambda * relevance - (1.0 - lambda) * max_sim[k];
      bool better = best == n || value > best_value;
      if (!better && value == best_value) {
        const RankedItem& cur = items[best];
        better = items[k].base_rank < cur.base_rank ||
                 (items[k].base_rank == cur.base_rank &&
                  items[k].item_id < cur.item_id);
      }
      if (better) {
        best = k;
        best_value = value;
      }
    }
    picked[best] = 1;
    out.push_back(items[best].item_id);
    for (std::size_t k = 0; k < n; ++k) {
      if (!picked[k]) {
        max_sim[k] =
            std::max(max_sim[k], cosine_similarity(vectors[k], vectors[best]));
      }
    }
  }
  return out;
}

FinalListPushPayload apply_policy(const TopTRequestPayload& request,
                                  const PublicData& catalog,
                                  const RerankPolicy& policy,
                                  Timestep current_timestep) {
  validate(policy);
  for (ItemId id : request.item_ids) {
    if (!catalog.has_item(id)) {
      throw LookupError("re-rank request names item " + std::to_string(id) +
                        " which is not in the catalog");
    }
  }
  std::vector<RankedItem> ranked;
  ranked.reserve(request.item_ids.size());
  for (std::size_t k = 0; k < request.item_ids.size(); ++k) {
    ranked.push_back(RankedItem{request.item_ids[k], k});
  }
  const FeatureLookup lookup = [&catalog](ItemId id) {
    return std::span<const double>(catalog.item(id).feature_vector);
  };
  const std::vector<ItemId> mmr_order =
      mmr_rerank(ranked, lookup, policy.diversity_lambda, ranked.size());

  std::int64_t max_popularity = 0;
  for (const ItemRecord& item : catalog.catalog()) {
    max_popularity = std::max(max_popularity, item.popularity_count);
  }

  struct Scored {
    ItemId id;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(mmr_order.size());
  for (std::size_t pos = 0; pos < mmr_order.size(); ++pos) {
    const ItemRecord& item = catalog.item(mmr_order[pos]);
    const double recency =
        1.0 / (1.0 + static_cast<double>(current_timestep - item.created_at));
    const double popularity =
        max_popularity == 0 ? 0.0
                            : static_cast<double>(item.popularity_count) /
                                  static_cast<double>(max_popularity);
    scored.push_back(Scored{item.item_id,
                            1.0 / (static_cast<double>(pos) + 1.0) +
                                policy.freshness_weight * recency +
                                policy.popularity_weight * popularity});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) {
                     return a.score > b.score;
                   });

  std::size_t out_size = policy.output_size;
  if (out_size > scored.size()) {
    spdlog::warn("apply_policy: output size {} exceeds {} requested items",
                 out_size, scored.size());
    out_size = scored.size();
  }
  FinalListPushPayload payload;
  for (std::size_t k = 0; k < out_size; ++k) {
    const ItemRecord& item = catalog.item(scored[k].id);
    payload.items.push_back(FinalListItem{item.item_id, item.feature_vector,
                                          item.created_at,
                                          item.popularity_count});
  }
  return payload;
}

FinalListPushPayload cold_start_list(UserId /*user_id*/, const PublicData& data,
                                     const RerankPolicy& policy,
                                     Timestep current_timestep) {
  validate(policy);
  const CandidateSet popular = popularity_top_k(data, policy.output_size);
  TopTRequestPayload request;
  for (const Candidate& c : popular.items) request.item_ids.push_back(c.item_id);
  return apply_policy(request, data, policy, current_timestep);
}

}  // namespace pprsf

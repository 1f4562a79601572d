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

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pprsf/core/dataset.h"
#include "pprsf/fed/message.h"

namespace pprsf {

struct RerankPolicy {
  double diversity_lambda = 1.0;  // [0, 1]; 1 = pure relevance
  double freshness_weight = 0.0;
  double popularity_weight = 0.0;
  std::size_t output_size = 5;
};

void validate(const RerankPolicy& policy);

struct RankedItem {
  ItemId item_id = 0;
  std::size_t base_rank = 0;  // 0 = best
};

// Cosine similarity; 0 when either vector is all zeros.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

using FeatureLookup = std::function<std::span<const double>(ItemId)>;

// Greedy maximal marginal relevance. Relevance is 1 / (base_rank + 1); each
// step picks the item maximizing
//   lambda * relevance - (1 - lambda) * max cosine to already-picked items,
// ties to the better base rank, then the lower item_id. An output_size
// larger than the input is clamped (with a warning).
std::vector<ItemId> mmr_rerank(std::span<const RankedItem> items,
                               const FeatureLookup& features, double lambda,
                               std::size_t output_size);

// MMR over the requested ids (base rank = request position), then
//   combined = 1 / (mmr_position + 1)
//            + freshness_weight  / (1 + now - created_at)
//            + popularity_weight * popularity / max catalog popularity
// stable-sorted descending; the first output_size items are returned with
// their content. Throws LookupError for an id outside the catalog.
FinalListPushPayload apply_policy(const TopTRequestPayload& request,
                                  const PublicData& catalog,
                                  const RerankPolicy& policy,
                                  Timestep current_timestep);

// Popularity prefix of output_size items passed through apply_policy; used
// for users with no history or no reachable ranking model.
FinalListPushPayload cold_start_list(UserId user_id, const PublicData& data,
                                     const RerankPolicy& policy,
                                     Timestep current_timestep);

}  // namespace pprsf

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <gtest/gtest.h>

#include "pprsf/common/error.h"
#include "pprsf/rerank/rerank.h"
#include "test_support.h"

namespace pprsf {
namespace {

using testing::item;

PublicData catalog_of(std::vector<ItemRecord> items) {
  return PublicData(Dims{2, 1, 1}, std::move(items),
                    {testing::user(1, {0.0})});
}

std::vector<ItemId> ids_of(const FinalListPushPayload& p) {
  return p.item_ids();
}

FeatureLookup lookup_from(const std::map<ItemId, std::vector<double>>& m) {
  return [&m](ItemId id) { return std::span<const double>(m.at(id)); };
}

// Straight-line MMR: recomputes every similarity from scratch each step.
std::vector<ItemId> reference_mmr(const std::vector<RankedItem>& items,
                                  const std::map<ItemId, std::vector<double>>& f,
                                  double lambda, std::size_t out) {
  auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      ab += a[j] * b[j];
      aa += a[j] * a[j];
      bb += b[j] * b[j];
    }
    if (aa == 0 || bb == 0) return 0.0;
    return ab / (std::sqrt(aa) * std::sqrt(bb));
  };
  std::vector<ItemId> picked;
  std::vector<RankedItem> rest = items;
  while (picked.size() < out && !rest.empty()) {
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rest.size(); ++k) {
      double sim = 0.0;
      for (ItemId p : picked) sim = std::max(sim, cos(f.at(rest[k].item_id), f.at(p)));
      const double v = lambda / (rest[k].base_rank + 1.0) - (1 - lambda) * sim;
      const bool tie_better =
          v == best_v &&
          std::pair(rest[k].base_rank, rest[k].item_id) <
              std::pair(rest[best].base_rank, rest[best].item_id);
      if (v > best_v || tie_better) {
        best = k;
        best_v = v;
      }
    }
    picked.push_back(rest[best].item_id);
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return picked;
}

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{1, 0},
                                     std::vector<double>{2, 0}),
                   1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{1, 0},
                                     std::vector<double>{0, 3}),
                   0.0);
  EXPECT_EQ(cosine_similarity(std::vector<double>{0, 0},
                              std::vector<double>{1, 1}),
            0.0);
}

TEST(Mmr, PureRelevanceKeepsBaseOrder) {
  const std::map<ItemId, std::vector<double>> f = {
      {7, {1, 0}}, {3, {1, 0}}, {9, {0, 1}}, {4, {1, 1}}};
  const std::vector<RankedItem> items = {{7, 0}, {3, 1}, {9, 2}, {4, 3}};
  EXPECT_EQ(mmr_rerank(items, lookup_from(f), 1.0, 4),
            (std::vector<ItemId>{7, 3, 9, 4}));
  EXPECT_EQ(mmr_rerank(items, lookup_from(f), 1.0, 2),
            (std::vector<ItemId>{7, 3}));
}

TEST(Mmr, DuplicateFeaturesArePushedDown) {
  // lambda 0.5: A = 0.5, B = 0.25, C = 1/6 first; then B drops to -0.25.
  const std::map<ItemId, std::vector<double>> f = {
      {1, {1, 0}}, {2, {1, 0}}, {3, {0, 1}}};
  const std::vector<RankedItem> items = {{1, 0}, {2, 1}, {3, 2}};
  EXPECT_EQ(mmr_rerank(items, lookup_from(f), 0.5, 3),
            (std::vector<ItemId>{1, 3, 2}));
}

TEST(Mmr, SizeOneAndClamping) {
  const std::map<ItemId, std::vector<double>> f = {{5, {1, 2}}, {6, {2, 1}}};
  const std::vector<RankedItem> items = {{5, 1}, {6, 0}};
  EXPECT_EQ(mmr_rerank(items, lookup_from(f), 0.3, 1),
            (std::vector<ItemId>{6}));
  EXPECT_EQ(mmr_rerank(items, lookup_from(f), 0.3, 10).size(), 2u);
  EXPECT_THROW(mmr_rerank(items, lookup_from(f), 1.5, 1), ConfigError);
}

TEST(Mmr, TieBreaksOnItemId) {
  const std::map<ItemId, std::vector<double>> f = {{8, {1}}, {2, {1}}};
  const std::vector<RankedItem> items = {{8, 0}, {2, 0}};
  EXPECT_EQ(mmr_rerank(items, lookup_from(f), 1.0, 2),
            (std::vector<ItemId>{2, 8}));
}

TEST(Mmr, MatchesReferenceOnRandomInputs) {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.uniform_index(10);
    std::map<ItemId, std::vector<double>> f;
    std::vector<RankedItem> items;
    for (std::size_t k = 0; k < n; ++k) {
      const ItemId id = static_cast<ItemId>(100 + 3 * k);
      std::vector<double> v(3);
      // Coarse values so exact duplicates and ties happen.
      for (double& x : v) x = static_cast<double>(rng.uniform_index(3)) - 1.0;
      f[id] = v;
      items.push_back(RankedItem{id, k});
    }
    rng.shuffle(std::span<RankedItem>(items));
    const double lambda = rng.uniform_index(5) / 4.0;
    const std::size_t out = 1 + rng.uniform_index(n);
    const std::vector<ItemId> got = mmr_rerank(items, lookup_from(f), lambda, out);
    EXPECT_EQ(got, reference_mmr(items, f, lambda, out));
    std::vector<ItemId> sorted = got;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  }
}

TEST(Mmr, ZeroLambdaSecondPickIsLeastSimilar) {
  Rng rng(32);
  for (int t = 0; t < 50; ++t) {
    std::map<ItemId, std::vector<double>> f;
    std::vector<RankedItem> items;
    for (std::size_t k = 0; k < 6; ++k) {
      f[static_cast<ItemId>(k + 1)] = {rng.normal(), rng.normal(), rng.normal()};
      items.push_back(RankedItem{static_cast<ItemId>(k + 1), k});
    }
    const std::vector<ItemId> got = mmr_rerank(items, lookup_from(f), 0.0, 2);
    const auto& first = f.at(got[0]);
    double best = std::numeric_limits<double>::infinity();
    for (const RankedItem& it : items) {
      if (it.item_id == got[0]) continue;
      best = std::min(best, std::max(0.0, cosine_similarity(first, f.at(it.item_id))));
    }
    EXPECT_DOUBLE_EQ(
        std::max(0.0, cosine_similarity(first, f.at(got[1]))), best);
  }
}

TEST(ApplyPolicy, IdentityPolicyKeepsRequestPrefix) {
  const PublicData cat = catalog_of({item(1, {1, 0}, 4, 3), item(2, {1, 0}, 9, 1),
                                     item(3, {0, 1}, 0, 7)});
  RerankPolicy p;
  p.output_size = 2;
  const FinalListPushPayload out =
      apply_policy(TopTRequestPayload{{3, 1, 2}}, cat, p, 10);
  EXPECT_EQ(ids_of(out), (std::vector<ItemId>{3, 1}));
  EXPECT_EQ(out.items[0].features, (std::vector<double>{0, 1}));
  EXPECT_EQ(out.items[0].created_at, 7);
  EXPECT_EQ(out.items[1].popularity_count, 4);
}

TEST(ApplyPolicy, FreshnessPromotesNewItem) {
  const PublicData cat = catalog_of({item(1, {1, 0}, 0, 0), item(2, {0, 1}, 0, 9)});
  RerankPolicy p;
  p.output_size = 2;
  p.freshness_weight = 2.0;
  // 1 + 2/11 for the old item against 1/2 + 2/2 for the new one.
  EXPECT_EQ(ids_of(apply_policy(TopTRequestPayload{{1, 2}}, cat, p, 10)),
            (std::vector<ItemId>{2, 1}));
  p.freshness_weight = 1.0;
  // 1 + 1/11 against 1/2 + 1/2.
  EXPECT_EQ(ids_of(apply_policy(TopTRequestPayload{{1, 2}}, cat, p, 10)),
            (std::vector<ItemId>{1, 2}));
}

TEST(ApplyPolicy, MixedHandComputedScores) {
  // Scores at t = 10, freshness 0.5, popularity 1, max popularity 10:
  //   1: 1    + 0.5/2  + 0   = 1.25
  //   2: 1/2  + 0.5/11 + 1   = 1.545
  //   3: 1/3  + 0.5/6  + 0.5 = 0.917
  //   4: 1/4  + 0.5/3  + 0.2 = 0.617
  //   5: 1/5  + 0.5/9  + 0.8 = 1.056
  const PublicData cat = catalog_of(
      {item(1, {1, 0}, 0, 9), item(2, {0, 1}, 10, 0), item(3, {1, 1}, 5, 5),
       item(4, {1, -1}, 2, 8), item(5, {-1, 0}, 8, 2)});
  RerankPolicy p;
  p.freshness_weight = 0.5;
  p.popularity_weight = 1.0;
  p.output_size = 5;
  EXPECT_EQ(ids_of(apply_policy(TopTRequestPayload{{1, 2, 3, 4, 5}}, cat, p, 10)),
            (std::vector<ItemId>{2, 1, 5, 3, 4}));
  p.output_size = 3;
  EXPECT_EQ(ids_of(apply_policy(TopTRequestPayload{{1, 2, 3, 4, 5}}, cat, p, 10)),
            (std::vector<ItemId>{2, 1, 5}));
}

TEST(ApplyPolicy, UnknownItemIsLookupError) {
  const PublicData cat = catalog_of({item(1, {1, 0})});
  EXPECT_THROW(apply_policy(TopTRequestPayload{{1, 42}}, cat, RerankPolicy{}, 1),
               LookupError);
}

TEST(ApplyPolicy, EqualScoresKeepMmrOrder) {
  const PublicData cat =
      catalog_of({item(1, {1, 0}, 0, 0), item(2, {0, 1}, 0, 0)});
  RerankPolicy p;
  p.output_size = 2;
  p.freshness_weight = 1.0;
  // Identical freshness and popularity terms; only position separates them.
  EXPECT_EQ(ids_of(apply_policy(TopTRequestPayload{{2, 1}}, cat, p, 5)),
            (std::vector<ItemId>{2, 1}));
}

TEST(ApplyPolicy, OutputIsSubsetOfRequest) {
  Rng rng(33);
  std::vector<ItemRecord> items;
  for (ItemId id = 1; id <= 30; ++id) {
    items.push_back(item(id, {rng.normal(), rng.normal()},
                         static_cast<std::int64_t>(rng.uniform_index(20)),
                         static_cast<Timestep>(rng.uniform_index(10))));
  }
  const PublicData cat = catalog_of(items);
  for (int t = 0; t < 50; ++t) {
    std::vector<ItemId> req;
    for (ItemId id = 1; id <= 30; ++id) {
      if (rng.uniform01() < 0.3) req.push_back(id);
    }
    if (req.empty()) req.push_back(1);
    rng.shuffle(std::span<ItemId>(req));
    RerankPolicy p;
    p.diversity_lambda = rng.uniform01();
    p.freshness_weight = rng.uniform01();
    p.popularity_weight = rng.uniform01();
    p.output_size = 1 + rng.uniform_index(8);
    const std::vector<ItemId> out =
        ids_of(apply_policy(TopTRequestPayload{req}, cat, p, 12));
    EXPECT_EQ(out.size(), std::min(p.output_size, req.size()));
    for (ItemId id : out) {
      EXPECT_NE(std::find(req.begin(), req.end(), id), req.end());
    }
  }
}

TEST(ColdStart, MostPopularFirst) {
  const PublicData cat = catalog_of({item(1, {1, 0}, 3), item(2, {0, 1}, 9),
                                     item(3, {1, 1}, 5), item(4, {1, 2}, 1)});
  RerankPolicy p;
  p.output_size = 3;
  EXPECT_EQ(ids_of(cold_start_list(77, cat, p, 0)),
            (std::vector<ItemId>{2, 3, 1}));
}

TEST(ColdStart, AllZeroPopularityGivesAscendingIds) {
  const PublicData cat = catalog_of({item(9, {1, 0}), item(4, {0, 1}),
                                     item(6, {1, 1})});
  RerankPolicy p;
  p.output_size = 2;
  EXPECT_EQ(ids_of(cold_start_list(1, cat, p, 0)), (std::vector<ItemId>{4, 6}));
}

TEST(ColdStart, FreshnessReordersPopularPrefix) {
  // Popular prefix {2, 3}; item 3 is brand new at t = 10.
  const PublicData cat = catalog_of({item(1, {1, 0}, 1, 10), item(2, {0, 1}, 9, 0),
                                     item(3, {1, 1}, 5, 10)});
  RerankPolicy p;
  p.output_size = 2;
  p.freshness_weight = 5.0;
  EXPECT_EQ(ids_of(cold_start_list(1, cat, p, 10)), (std::vector<ItemId>{3, 2}));
}

}  // namespace
}  // namespace pprsf

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
#include <set>

#include <gtest/gtest.h>

#include "pprsf/common/error.h"
#include "pprsf/eval/harness.h"
#include "pprsf/eval/metrics.h"
#include "pprsf/eval/split.h"
#include "pprsf/fed/protocol.h"
#include "pprsf/recall/recall_model.h"
#include "reference.h"
#include "test_support.h"

namespace pprsf {
namespace {

using testing::item;
using testing::user;

std::unordered_set<ItemId> set_of(std::initializer_list<ItemId> ids) {
  return std::unordered_set<ItemId>(ids);
}

TEST(Metrics, HandExamples) {
  const std::vector<ItemId> ranked = {1, 2, 3};
  EXPECT_DOUBLE_EQ(precision_at_k(ranked, set_of({2}), 2), 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(ranked, set_of({2}), 2), 1.0);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked, set_of({2}), 2), 1.0 / std::log2(3.0));
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked, set_of({1}), 3), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k(ranked, set_of({1, 3, 9}), 3), 2.0 / 3.0);
  // Hits at ranks 1 and 3 of two relevant items.
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked, set_of({1, 3}), 3),
                   (1.0 + 0.5) / (1.0 + 1.0 / std::log2(3.0)));
}

TEST(Metrics, EmptyRelevantAndShortLists) {
  const std::vector<ItemId> ranked = {4};
  EXPECT_EQ(precision_at_k(ranked, {}, 5), 0.0);
  EXPECT_EQ(recall_at_k(ranked, {}, 5), 0.0);
  EXPECT_EQ(ndcg_at_k(ranked, {}, 5), 0.0);
  EXPECT_DOUBLE_EQ(precision_at_k(ranked, set_of({4}), 5), 0.2);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked, set_of({4}), 5), 1.0);
}

TEST(Metrics, MatchReferenceOnRandomInstances) {
  Rng rng(41);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.uniform_index(30);
    std::vector<ItemId> ranked(n);
    for (std::size_t j = 0; j < n; ++j) ranked[j] = static_cast<ItemId>(j + 1);
    rng.shuffle(std::span<ItemId>(ranked));
    std::unordered_set<ItemId> rel;
    std::set<long> rel_ref;
    for (ItemId id = 1; id <= static_cast<ItemId>(n) + 3; ++id) {
      if (rng.uniform01() < 0.3) {
        rel.insert(id);
        rel_ref.insert(id);
      }
    }
    const std::vector<long> ranked_ref(ranked.begin(), ranked.end());
    for (std::size_t k : {1u, 3u, 5u, 10u, 40u}) {
      EXPECT_NEAR(precision_at_k(ranked, rel, k),
                  reference::precision(ranked_ref, rel_ref, k), 1e-9);
      EXPECT_NEAR(recall_at_k(ranked, rel, k),
                  reference::recall(ranked_ref, rel_ref, k), 1e-9);
      EXPECT_NEAR(ndcg_at_k(ranked, rel, k),
                  reference::ndcg(ranked_ref, rel_ref, k), 1e-9);
      const double nd = ndcg_at_k(ranked, rel, k);
      EXPECT_GE(nd, 0.0);
      EXPECT_LE(nd, 1.0 + 1e-12);
    }
  }
}

Dataset split_example() {
  std::vector<ItemRecord> items;
  for (ItemId id = 10; id < 20; ++id) items.push_back(item(id, {1, 0}, 0));
  items[0].popularity_count = 1;
  items[1].popularity_count = 1;
  items[2].popularity_count = 2;
  items[3].popularity_count = 1;
  return Dataset::create(
      Dims{2, 1, 1}, items,
      {user(1, {0.1}, {{10, 1.0, 0}, {11, 0.0, 1}, {12, 1.0, 2}}),
       user(2, {0.2}, {{12, 1.0, 0}, {13, 1.0, 0}}),
       user(3, {0.3}, {{11, 0.0, 0}, {12, 0.0, 1}})},
      {PrivateShard::make(1, {0.5}), PrivateShard::make(2, {0.6}),
       PrivateShard::make(3, {0.7})});
}

TEST(Split, LastPositiveIsHeldOut) {
  const Dataset d = split_example();
  const EvalSplit s = make_split(d, 1, 3, 5);
  // User 3 has no positive and is skipped.
  ASSERT_EQ(s.users.size(), 2u);
  EXPECT_EQ(s.users[0].user_id, 1);
  EXPECT_EQ(s.users[0].positives, (std::vector<ItemId>{12}));
  // Same timestep: the larger item id counts as later.
  EXPECT_EQ(s.users[1].positives, (std::vector<ItemId>{13}));
  EXPECT_EQ(s.train.user(1).interaction_log.size(), 2u);
  EXPECT_EQ(s.train.user(2).interaction_log.size(), 1u);
  EXPECT_EQ(s.train.user(3).interaction_log.size(), 2u);
  EXPECT_EQ(s.train.item(12).popularity_count, 1);
  EXPECT_EQ(s.train.item(13).popularity_count, 0);
  EXPECT_EQ(s.users[0].negatives.size(), 3u);
  EXPECT_EQ(s.find(3), nullptr);
  EXPECT_EQ(s.train.shard(1), d.shard(1));
}

TEST(Split, HygieneOnRandomData) {
  const Dataset d = testing::random_dataset(42, 30, 60, Dims{2, 2, 2}, 15);
  const EvalSplit s = make_split(d, 2, 4, 9);
  ASSERT_FALSE(s.users.empty());
  for (const EvalUser& u : s.users) {
    EXPECT_EQ(u.positives.size(), 2u);
    EXPECT_EQ(u.negatives.size(), 8u);
    std::unordered_set<ItemId> seen;
    for (const Interaction& e : d.user(u.user_id).interaction_log) {
      seen.insert(e.item_id);
    }
    for (ItemId id : u.negatives) EXPECT_EQ(seen.count(id), 0u);
    for (ItemId id : u.positives) {
      EXPECT_EQ(seen.count(id), 1u);
      for (const Interaction& e : s.train.user(u.user_id).interaction_log) {
        EXPECT_NE(e.item_id, id);
      }
    }
  }
  const EvalSplit again = make_split(d, 2, 4, 9);
  EXPECT_EQ(again.fingerprint, s.fingerprint);
  for (std::size_t i = 0; i < s.users.size(); ++i) {
    EXPECT_EQ(again.users[i].negatives, s.users[i].negatives);
  }
  EXPECT_NE(make_split(d, 2, 4, 10).fingerprint, s.fingerprint);
}

TEST(Split, Errors) {
  const Dataset d = split_example();
  EXPECT_THROW(make_split(d, 0, 3, 1), ConfigError);
  EXPECT_THROW(make_split(d, 1, 0, 1), ConfigError);
  EXPECT_THROW(make_split(d, 5, 1, 1), EmptyEvaluationError);
}

EvalSplit big_split() {
  const Dataset d = testing::random_dataset(7, 240, 160, Dims{2, 1, 1}, 10);
  return make_split(d, 1, 99, 3);
}

RankingSystem fixed_order(const EvalSplit& split, bool positives_first) {
  return [&split, positives_first](UserId u, std::span<const ItemId> pool) {
    const EvalUser* eu = split.find(u);
    std::vector<ScoredItem> out;
    for (ItemId id : pool) {
      const bool pos = std::binary_search(eu->positives.begin(),
                                          eu->positives.end(), id);
      out.push_back(ScoredItem{id, pos == positives_first ? 0.9 : 0.1});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScoredItem& a, const ScoredItem& b) {
                       return a.probability > b.probability;
                     });
    return out;
  };
}

TEST(EvaluateSystem, OracleAndAdversary) {
  const EvalSplit split = big_split();
  ASSERT_GE(split.users.size(), 200u);
  const MetricsReport oracle =
      evaluate_system("oracle", fixed_order(split, true), split, {1, 5, 10});
  EXPECT_DOUBLE_EQ(oracle.ndcg_at_k.at(10), 1.0);
  EXPECT_DOUBLE_EQ(oracle.precision_at_k.at(1), 1.0);
  EXPECT_DOUBLE_EQ(oracle.recall_at_k.at(5), 1.0);
  EXPECT_EQ(oracle.n_users_evaluated, split.users.size());
  EXPECT_EQ(oracle.per_user_primary.size(), split.users.size());
  EXPECT_NEAR(oracle.log_loss, -std::log(0.9), 1e-12);

  const MetricsReport adversary =
      evaluate_system("adv", fixed_order(split, false), split, {1, 5, 10});
  EXPECT_EQ(adversary.ndcg_at_k.at(10), 0.0);
  EXPECT_EQ(adversary.recall_at_k.at(10), 0.0);
}

TEST(EvaluateSystem, RandomRankingHitsTenPercent) {
  const EvalSplit split = big_split();
  const RankingSystem random = [](UserId u, std::span<const ItemId> pool) {
    std::vector<ItemId> ids(pool.begin(), pool.end());
    Rng rng(static_cast<std::uint64_t>(u) * 7919);
    rng.shuffle(std::span<ItemId>(ids));
    std::vector<ScoredItem> out;
    for (ItemId id : ids) out.push_back(ScoredItem{id, 0.5});
    return out;
  };
  const MetricsReport r = evaluate_system("random", random, split, {10});
  EXPECT_NEAR(r.recall_at_k.at(10), 0.1, 0.03);
  EXPECT_NEAR(r.precision_at_k.at(10), 0.01, 0.003);
}

TEST(EvaluateSystem, BadOutputsFailUsers) {
  const EvalSplit split = make_split(split_example(), 1, 3, 5);
  const RankingSystem drops_one = [](UserId u, std::span<const ItemId> pool) {
    if (u == 2) throw Error("boom");
    std::vector<ScoredItem> out;
    for (ItemId id : pool) out.push_back(ScoredItem{id, 0.5});
    out.pop_back();
    return out;
  };
  EXPECT_THROW(evaluate_system("bad", drops_one, split, {1}),
               EmptyEvaluationError);
  const MetricsReport only =
      evaluate_system("oracle", fixed_order(split, true), split, {1}, 1, 2);
  EXPECT_EQ(only.n_users_evaluated, 1u);
  EXPECT_EQ(only.per_user_primary.front().user_id, 2);
  // primary_k is added to the cutoffs.
  EXPECT_EQ(only.k_values, (std::vector<std::size_t>{1}));
  const MetricsReport r =
      evaluate_system("oracle", fixed_order(split, true), split, {5, 1}, 3);
  EXPECT_EQ(r.k_values, (std::vector<std::size_t>{1, 3, 5}));
}

TEST(ModelSystem, PublicOnlyIgnoresPrivateWeights) {
  const Dataset d = split_example();
  const EvalSplit split = make_split(d, 1, 3, 5);
  // Layout [pub | pri | item | bias]; only the private weight is nonzero.
  const RankingParams p{{0, 3.0, 0, 0, 0}};
  const std::vector<ItemId> pool = split.users[0].pool();
  for (const ScoredItem& s : make_model_system(p, d, FeatureMap::kConcat,
                                               false)(1, pool)) {
    EXPECT_EQ(s.probability, 0.5);
  }
  for (const ScoredItem& s : make_model_system(p, d, FeatureMap::kConcat,
                                               true)(1, pool)) {
    EXPECT_NEAR(s.probability, reference::sigmoid(1.5), 1e-15);
  }
  EXPECT_THROW(make_per_user_system({}, d, FeatureMap::kConcat)(1, pool),
               LookupError);
}

struct Clients {
  Dataset data;
  std::vector<ClientState> clients;
};

Clients make_clients(std::uint64_t seed, std::size_t n, std::size_t k) {
  Clients c;
  c.data = testing::random_dataset(seed, n, 30, Dims{2, 2, 1}, 10);
  const RecallModel recall = train_recall(c.data, RecallHyper{}, seed);
  for (const PublicUserRecord& u : c.data.public_store()) {
    ClientState s = ClientState::from_dataset(c.data, u.user_id,
                                              FeatureMap::kConcat,
                                              client_seed(seed, u.user_id));
    s.candidates = recall_top_k(recall, u.user_id, c.data.server_view(), k, false);
    c.clients.push_back(std::move(s));
  }
  return c;
}

TEST(Centralized, SingleClientMatchesSeededSgd) {
  const Clients c = make_clients(51, 1, 12);
  RankHyper h;
  h.batch_size = 5;
  h.learning_rate = 0.3;
  const RankingParams init = init_global(c.clients[0].param_dimension(), 1);
  const RankingParams got = train_centralized_sum(c.clients, h, 3, init, 77);
  const auto trace = reference::sgd_trace(init.weights,
                                          build_training_set(c.clients[0]), 3,
                                          5, 0.3, h.l2_reg, 77);
  EXPECT_EQ(got.weights, trace.back());
  EXPECT_EQ(train_centralized_sum(c.clients, h, 3, init, 77), got);
  EXPECT_THROW(train_centralized_sum(c.clients, h, 0, init, 77), ConfigError);
}

TEST(Centralized, FullBatchStepEqualsFedAvgStep) {
  Clients c = make_clients(52, 4, 6);
  RankHyper h;
  h.local_epochs = 1;
  h.batch_size = 1000;
  h.learning_rate = 0.5;
  h.l2_reg = 0.01;
  const RankingParams init = init_global(c.clients[0].param_dimension(), 2);
  const RankingParams central = train_centralized_sum(c.clients, h, 1, init, 3);

  FedConfig fc;
  fc.rounds = 1;
  fc.rank = h;
  fc.early_stop_tolerance = 0.0;
  ServerState server{init, 0, false};
  run_round(server, c.clients, fc, 1, MessageArchive(PrivateValueIndex{}));
  for (std::size_t j = 0; j < init.dimension(); ++j) {
    EXPECT_NEAR(server.global.weights[j], central.weights[j], 1e-12);
  }
}

TEST(Centralized, PublicOnlyPoolZeroesPrivateBlock) {
  const Clients c = make_clients(53, 3, 5);
  const auto pub = pooled_training_set(c.clients, false);
  const auto all = pooled_training_set(c.clients, true);
  ASSERT_EQ(pub.size(), all.size());
  ASSERT_EQ(pub.size(), 15u);
  // Layout: public (2), private (1), item (2), bias.
  for (std::size_t i = 0; i < pub.size(); ++i) {
    EXPECT_EQ(pub[i].x[2], 0.0);
    EXPECT_NE(all[i].x[2], 0.0);
    EXPECT_EQ(pub[i].label, all[i].label);
  }
}

TEST(LocalOnly, OneRoundEqualsSingleClientFederation) {
  Clients c = make_clients(54, 1, 10);
  FedConfig fc;
  fc.rounds = 1;
  fc.rank.batch_size = 3;
  fc.early_stop_tolerance = 0.0;
  const RankingParams init = init_global(c.clients[0].param_dimension(), 4);
  ServerState server{init, 0, false};
  run_round(server, c.clients, fc, 1, MessageArchive(PrivateValueIndex{}));
  EXPECT_EQ(train_local_only(c.clients[0], fc.rank, 1, init), server.global);
}

TEST(LocalOnly, AllNegativeClientLearnsLowScores) {
  Clients c = make_clients(55, 1, 10);
  ClientState s = c.clients[0];
  s.own_interactions.clear();
  RankHyper h;
  h.learning_rate = 0.5;
  const RankingParams theta =
      train_local_only(s, h, 10, init_global(s.param_dimension(), 1));
  for (const LabeledExample& ex : build_training_set(s)) {
    EXPECT_LT(predict(theta, ex.x), 0.5);
  }
}

MetricsReport report(const std::string& label, double ndcg10,
                     std::vector<UserMetric> per_user = {},
                     std::string fingerprint = "abc") {
  MetricsReport r;
  r.system_label = label;
  r.split_fingerprint = std::move(fingerprint);
  r.k_values = {10};
  r.primary_k = 10;
  r.precision_at_k[10] = ndcg10 / 4;
  r.recall_at_k[10] = ndcg10 / 2;
  r.ndcg_at_k[10] = ndcg10;
  r.log_loss = 1.0 - ndcg10;
  r.n_users_evaluated = per_user.size();
  r.per_user_primary = std::move(per_user);
  return r;
}

TEST(DeltaReport, PassAndFailExamples) {
  const MetricsReport sum = report("Sum", 0.80);
  const std::vector<MetricsReport> locals = {
      report("Local", 0.0, {{1, 0.5}, {2, 0.9}, {3, 0.6}})};
  const MetricsReport fl = report("FL", 0.77, {{1, 0.7}, {2, 0.8}, {3, 0.81}});
  const VerdictReport v = delta_precision_report(sum, fl, locals, 0.05);
  EXPECT_TRUE(v.delta_pass);
  EXPECT_NEAR(v.gaps.front().gap, 0.03, 1e-12);
  EXPECT_EQ(v.primary_metric, "ndcg@10");
  EXPECT_NEAR(v.mean_local, 2.0 / 3.0, 1e-12);
  EXPECT_TRUE(v.fl_exceeds_mean_local);
  EXPECT_NEAR(v.validity_fraction, 2.0 / 3.0, 1e-12);
  EXPECT_FALSE(v.p_public_only.has_value());

  const MetricsReport weak = report("FL", 0.74, {{1, 0.7}});
  const MetricsReport pub = report("PublicOnly", 0.76);
  const VerdictReport w = delta_precision_report(sum, weak, locals, 0.05, &pub);
  EXPECT_FALSE(w.delta_pass);
  EXPECT_NEAR(w.p_sum - w.p_fl, 0.06, 1e-12);
  ASSERT_TRUE(w.fl_exceeds_public_only.has_value());
  EXPECT_FALSE(*w.fl_exceeds_public_only);
}

TEST(DeltaReport, GapIsSymmetric) {
  Rng rng(61);
  for (int t = 0; t < 20; ++t) {
    const MetricsReport a = report("A", rng.uniform01());
    const MetricsReport b = report("B", rng.uniform01());
    const VerdictReport ab = delta_precision_report(a, b, {}, 0.05);
    const VerdictReport ba = delta_precision_report(b, a, {}, 0.05);
    ASSERT_EQ(ab.gaps.size(), ba.gaps.size());
    for (std::size_t i = 0; i < ab.gaps.size(); ++i) {
      EXPECT_EQ(ab.gaps[i].gap, ba.gaps[i].gap);
      EXPECT_EQ(ab.gaps[i].pass, ba.gaps[i].pass);
    }
    EXPECT_FALSE(ab.fl_exceeds_mean_local);
  }
}

TEST(DeltaReport, IncomparableReports) {
  const MetricsReport sum = report("Sum", 0.8, {}, "one");
  const MetricsReport fl = report("FL", 0.8, {}, "two");
  EXPECT_THROW(delta_precision_report(sum, fl, {}, 0.05),
               IncomparableReportsError);
  MetricsReport other_k = report("Sum", 0.8);
  other_k.primary_k = 5;
  EXPECT_THROW(delta_precision_report(other_k, report("FL", 0.8), {}, 0.05),
               IncomparableReportsError);
  EXPECT_THROW(delta_precision_report(report("S", 0.8), report("F", 0.8), {}, -1),
               ConfigError);
}

TEST(MetricsJson, RoundTrip) {
  const EvalSplit split = make_split(split_example(), 1, 3, 5);
  const MetricsReport r =
      evaluate_system("FL", fixed_order(split, false), split, {1, 2}, 2);
  const MetricsReport back = metrics_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(back.system_label, r.system_label);
  EXPECT_EQ(back.split_fingerprint, r.split_fingerprint);
  EXPECT_EQ(back.k_values, r.k_values);
  EXPECT_EQ(back.primary_k, r.primary_k);
  EXPECT_EQ(back.precision_at_k, r.precision_at_k);
  EXPECT_EQ(back.recall_at_k, r.recall_at_k);
  EXPECT_EQ(back.ndcg_at_k, r.ndcg_at_k);
  EXPECT_EQ(back.log_loss, r.log_loss);
  EXPECT_EQ(back.n_users_evaluated, r.n_users_evaluated);
  EXPECT_EQ(back.per_user_primary, r.per_user_primary);
}

}  // namespace
}  // namespace pprsf

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

#include "pprsf/eval/harness.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "pprsf/common/error.h"
#include "pprsf/common/numeric.h"
#include "pprsf/eval/metrics.h"
#include "pprsf/fed/protocol.h"

namespace pprsf {

namespace {

constexpr double kProbabilityFloor = 1e-15;

std::vector<ScoredItem> rank_pool(const RankingParams& params,
                                  const Dataset& dataset, FeatureMap map,
                                  bool use_private, UserId user,
                                  std::span<const ItemId> pool) {
  const PublicUserRecord& record = dataset.user(user);
  std::optional<std::span<const double>> pri;
  if (use_private) pri = dataset.shard(user).private_features;
  struct Row {
    ItemId id;
    double logit;
  };
  std::vector<Row> rows;
  rows.reserve(pool.size());
  for (ItemId id : pool) {
    const FeatureVector x = featurize(record.public_features, pri,
                                      dataset.item(id), dataset.dims(), map);
    rows.push_back(Row{id, dot(params.weights, x)});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.logit != b.logit) return a.logit > b.logit;
    return a.id < b.id;
  });
  std::vector<ScoredItem> out;
  out.reserve(rows.size());
  for (const Row& r : rows) out.push_back(ScoredItem{r.id, logistic(r.logit)});
  return out;
}

std::string metric_name(const char* base, std::size_t k) {
  return std::string(base) + "@" + std::to_string(k);
}

}  // namespace

MetricsReport evaluate_system(const std::string& label,
                              const RankingSystem& system,
                              const EvalSplit& split,
                              std::vector<std::size_t> k_values,
                              std::size_t primary_k,
                              std::optional<UserId> only_user) {
  if (primary_k < 1) throw ConfigError("primary k must be >= 1");
  if (std::find(k_values.begin(), k_values.end(), primary_k) ==
      k_values.end()) {
    k_values.push_back(primary_k);
  }
  std::sort(k_values.begin(), k_values.end());
  k_values.erase(std::unique(k_values.begin(), k_values.end()),
                 k_values.end());
  for (std::size_t k : k_values) {
    if (k < 1) throw ConfigError("metric cutoff k must be >= 1");
  }

  MetricsReport report;
  report.system_label = label;
  report.split_fingerprint = split.fingerprint;
  report.k_values = k_values;
  report.primary_k = primary_k;
  for (std::size_t k : k_values) {
    report.precision_at_k[k] = 0.0;
    report.recall_at_k[k] = 0.0;
    report.ndcg_at_k[k] = 0.0;
  }

  for (const EvalUser& user : split.users) {
    if (only_user && user.user_id != *only_user) continue;
    const std::vector<ItemId> pool = user.pool();
    std::vector<ScoredItem> ranked;
    try {
      ranked = system(user.user_id, pool);
      std::vector<ItemId> ids;
      for (const ScoredItem& s : ranked) ids.push_back(s.item_id);
      std::sort(ids.begin(), ids.end());
      if (ids != pool) {
        throw Error("system output is not a permutation of the pool");
      }
    } catch (const std::exception& e) {
      spdlog::warn("{}: user {} failed evaluation: {}", label, user.user_id,
                   e.what());
      ++report.n_users_failed;
      continue;
    }
    const std::unordered_set<ItemId> relevant(user.positives.begin(),
                                              user.positives.end());
    std::vector<ItemId> order;
    order.reserve(ranked.size());
    double loss = 0.0;
    for (const ScoredItem& s : ranked) {
      order.push_back(s.item_id);
      const double p =
          std::clamp(s.probability, kProbabilityFloor, 1.0 - kProbabilityFloor);
      loss -= relevant.count(s.item_id) ? std::log(p) : std::log(1.0 - p);
    }
    report.log_loss += loss / static_cast<double>(ranked.size());
    for (std::size_t k : k_values) {
      report.precision_at_k[k] += precision_at_k(order, relevant, k);
      report.recall_at_k[k] += recall_at_k(order, relevant, k);
      report.ndcg_at_k[k] += ndcg_at_k(order, relevant, k);
    }
    report.per_user_primary.push_back(
        UserMetric{user.user_id, ndcg_at_k(order, relevant, primary_k)});
    ++report.n_users_evaluated;
  }
  if (report.n_users_evaluated == 0) {
    throw EmptyEvaluationError(label + ": no user could be evaluated");
  }
  const auto n = static_cast<double>(report.n_users_evaluated);
  report.log_loss /= n;
  for (std::size_t k : k_values) {
    report.precision_at_k[k] /= n;
    report.recall_at_k[k] /= n;
    report.ndcg_at_k[k] /= n;
  }
  return report;
}

RankingSystem make_model_system(const RankingParams& params,
                                const Dataset& dataset, FeatureMap map,
                                bool use_private) {
  return [params, dataset, map, use_private](UserId user,
                                             std::span<const ItemId> pool) {
    return rank_pool(params, dataset, map, use_private, user, pool);
  };
}

RankingSystem make_per_user_system(
    std::unordered_map<UserId, RankingParams> params, const Dataset& dataset,
    FeatureMap map) {
  return [params = std::move(params), dataset, map](
             UserId user, std::span<const ItemId> pool) {
    auto it = params.find(user);
    if (it == params.end()) {
      throw LookupError("no local model for user " + std::to_string(user));
    }
    return rank_pool(it->second, dataset, map, true, user, pool);
  };
}

std::vector<LabeledExample> pooled_training_set(
    std::span<const ClientState> clients, bool use_private) {
  std::vector<LabeledExample> pooled;
  for (const ClientState& client : clients) {
    if (use_private) {
      auto examples = build_training_set(client);
      pooled.insert(pooled.end(), std::make_move_iterator(examples.begin()),
                    std::make_move_iterator(examples.end()));
      continue;
    }
    std::unordered_set<ItemId> positives;
    for (const Interaction& e : client.own_interactions) {
      if (e.positive()) positives.insert(e.item_id);
    }
    for (const Candidate& c : client.candidates.items) {
      pooled.push_back(LabeledExample{
          featurize(client.public_features, std::nullopt, c.features,
                    client.dims, client.feature_map),
          positives.count(c.item_id) ? 1.0 : 0.0});
    }
  }
  return pooled;
}

RankingParams train_centralized(std::span<const ClientState> clients,
                                const RankHyper& hyper, std::size_t epochs,
                                const RankingParams& init,
                                std::uint64_t shuffle_seed, bool use_private) {
  if (epochs < 1) throw ConfigError("centralized training needs >= 1 epoch");
  const std::vector<LabeledExample> pooled =
      pooled_training_set(clients, use_private);
  if (pooled.empty()) throw EmptyBatchError("no pooled training examples");
  RankHyper central = hyper;
  central.local_epochs = epochs;
  return sgd_train(init, pooled, central, shuffle_seed);
}

RankingParams train_local_only(const ClientState& client,
                               const RankHyper& hyper, std::size_t rounds,
                               const RankingParams& init) {
  RankingParams theta = init;
  for (std::size_t round = 1; round <= rounds; ++round) {
    auto update =
        local_train(theta, client, hyper, client_round_seed(client, round));
    if (!update) break;
    theta = std::move(update->params);
  }
  return theta;
}

VerdictReport delta_precision_report(const MetricsReport& p_sum,
                                     const MetricsReport& p_fl,
                                     std::span<const MetricsReport> p_locals,
                                     double delta_threshold,
                                     const MetricsReport* p_public_only) {
  if (!(delta_threshold >= 0.0)) {
    throw ConfigError("delta threshold must be >= 0");
  }
  auto check = [&](const MetricsReport& r) {
    if (r.split_fingerprint != p_fl.split_fingerprint) {
      throw IncomparableReportsError(
          r.system_label + " was evaluated on split " + r.split_fingerprint +
          ", " + p_fl.system_label + " on " + p_fl.split_fingerprint);
    }
    if (r.k_values != p_fl.k_values || r.primary_k != p_fl.primary_k) {
      throw IncomparableReportsError(r.system_label +
                                     " used different metric cutoffs");
    }
  };
  check(p_sum);
  for (const MetricsReport& r : p_locals) check(r);
  if (p_public_only != nullptr) check(*p_public_only);

  VerdictReport v;
  v.split_fingerprint = p_fl.split_fingerprint;
  v.delta_threshold = delta_threshold;
  v.primary_k = p_fl.primary_k;
  v.primary_metric = metric_name("ndcg", v.primary_k);
  auto add_gap = [&](std::string name, double s, double f) {
    const double gap = std::fabs(s - f);
    v.gaps.push_back(MetricGap{std::move(name), s, f, gap, gap < delta_threshold});
  };
  for (std::size_t k : p_fl.k_values) {
    add_gap(metric_name("ndcg", k), p_sum.ndcg_at_k.at(k), p_fl.ndcg_at_k.at(k));
    add_gap(metric_name("precision", k), p_sum.precision_at_k.at(k),
            p_fl.precision_at_k.at(k));
    add_gap(metric_name("recall", k), p_sum.recall_at_k.at(k),
            p_fl.recall_at_k.at(k));
  }
  add_gap("log_loss", p_sum.log_loss, p_fl.log_loss);
  v.p_sum = p_sum.primary();
  v.p_fl = p_fl.primary();
  v.delta_pass = std::fabs(v.p_sum - v.p_fl) < delta_threshold;

  std::unordered_map<UserId, double> fl_by_user;
  for (const UserMetric& m : p_fl.per_user_primary) fl_by_user[m.user_id] = m.value;
  double local_total = 0.0;
  std::size_t wins = 0;
  for (const MetricsReport& r : p_locals) {
    for (const UserMetric& m : r.per_user_primary) {
      auto it = fl_by_user.find(m.user_id);
      if (it == fl_by_user.end()) continue;
      v.clients.push_back(ClientComparison{m.user_id, it->second, m.value});
      local_total += m.value;
      if (it->second > m.value) ++wins;
    }
  }
  std::sort(v.clients.begin(), v.clients.end(),
            [](const ClientComparison& a, const ClientComparison& b) {
              return a.user_id < b.user_id;
            });
  if (!v.clients.empty()) {
    const auto n = static_cast<double>(v.clients.size());
    v.mean_local = local_total / n;
    v.validity_fraction = static_cast<double>(wins) / n;
  }
  v.fl_exceeds_mean_local = !v.clients.empty() && v.p_fl > v.mean_local;
  if (p_public_only != nullptr) {
    v.p_public_only = p_public_only->primary();
    v.fl_exceeds_public_only = v.p_fl > *v.p_public_only;
  }
  return v;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["system_label"] = r.system_label;
  j["split_fingerprint"] = r.split_fingerprint;
  j["k_values"] = r.k_values;
  j["primary_k"] = r.primary_k;
  auto metric_map = [](const std::map<std::size_t, double>& m) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, value] : m) out[std::to_string(k)] = value;
    return out;
  };
  j["precision_at_k"] = metric_map(r.precision_at_k);
  j["recall_at_k"] = metric_map(r.recall_at_k);
  j["ndcg_at_k"] = metric_map(r.ndcg_at_k);
  j["log_loss"] = r.log_loss;
  j["n_users_evaluated"] = r.n_users_evaluated;
  j["n_users_failed"] = r.n_users_failed;
  nlohmann::json per_user = nlohmann::json::array();
  for (const UserMetric& m : r.per_user_primary) {
    per_user.push_back({{"user_id", m.user_id}, {"value", m.value}});
  }
  j["per_user_primary"] = std::move(per_user);
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.system_label = j.at("system_label").get<std::string>();
  r.split_fingerprint = j.at("split_fingerprint").get<std::string>();
  r.k_values = j.at("k_values").get<std::vector<std::size_t>>();
  r.primary_k = j.at("primary_k").get<std::size_t>();
  auto read_map = [](const nlohmann::json& m) {
    std::map<std::size_t, double> out;
    for (const auto& [k, value] : m.items()) {
      out[std::stoul(k)] = value.get<double>();
    }
    return out;
  };
  r.precision_at_k = read_map(j.at("precision_at_k"));
  r.recall_at_k = read_map(j.at("recall_at_k"));
  r.ndcg_at_k = read_map(j.at("ndcg_at_k"));
  r.log_loss = j.at("log_loss").get<double>();
  r.n_users_evaluated = j.at("n_users_evaluated").get<std::size_t>();
  r.n_users_failed = j.at("n_users_failed").get<std::size_t>();
  for (const auto& m : j.at("per_user_primary")) {
    r.per_user_primary.push_back(
        UserMetric{m.at("user_id").get<UserId>(), m.at("value").get<double>()});
  }
  return r;
}

nlohmann::json to_json(const VerdictReport& v) {
  nlohmann::json j;
  j["split_fingerprint"] = v.split_fingerprint;
  j["delta_threshold"] = v.delta_threshold;
  j["primary_metric"] = v.primary_metric;
  nlohmann::json gaps = nlohmann::json::array();
  for (const MetricGap& g : v.gaps) {
    gaps.push_back({{"metric", g.metric},
                    {"sum", g.sum_value},
                    {"fl", g.fl_value},
                    {"gap", g.gap},
                    {"pass", g.pass}});
  }
  j["gaps"] = std::move(gaps);
  j["delta_pass"] = v.delta_pass;
  j["p_sum"] = v.p_sum;
  j["p_fl"] = v.p_fl;
  j["mean_local"] = v.mean_local;
  j["p_public_only"] = v.p_public_only ? nlohmann::json(*v.p_public_only)
                                       : nlohmann::json(nullptr);
  j["fl_exceeds_mean_local"] = v.fl_exceeds_mean_local;
  j["fl_exceeds_public_only"] = v.fl_exceeds_public_only
                                    ? nlohmann::json(*v.fl_exceeds_public_only)
                                    : nlohmann::json(nullptr);
  j["validity_fraction"] = v.validity_fraction;
  nlohmann::json clients = nlohmann::json::array();
  for (const ClientComparison& c : v.clients) {
    clients.push_back(
        {{"user_id", c.user_id}, {"fl", c.fl_value}, {"local", c.local_value}});
  }
  j["clients"] = std::move(clients);
  return j;
}

}  // namespace pprsf

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

#include "pprsf/fed/protocol.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "pprsf/common/error.h"
#include "pprsf/common/numeric.h"
#include "pprsf/common/rng.h"

namespace pprsf {

namespace {

enum SeedTag : std::uint64_t {
  kSampleTag = 11,
  kDropoutTag = 12,
  kClientTag = 13,
};

// Runs fn(k) for k in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) fn(k);
    });
  }
}

}  // namespace

std::string to_string(AggregationRule rule) {
  return rule == AggregationRule::kUniform ? "uniform" : "sample_weighted";
}

AggregationRule aggregation_rule_from_string(const std::string& name) {
  if (name == "sample_weighted") return AggregationRule::kSampleWeighted;
  if (name == "uniform") return AggregationRule::kUniform;
  throw ConfigError("unknown aggregation rule '" + name +
                    "' (expected sample_weighted or uniform)");
}

void validate(const FedConfig& c) {
  validate(c.rank);
  if (c.rounds < 1) throw ConfigError("federation.rounds must be >= 1");
  if (!(c.fraction > 0.0 && c.fraction <= 1.0)) {
    throw ConfigError("federation.fraction must lie in (0, 1]");
  }
  if (!(c.dropout_prob >= 0.0 && c.dropout_prob < 1.0)) {
    throw ConfigError("federation.dropout_prob must lie in [0, 1)");
  }
  if (!(c.early_stop_tolerance >= 0.0)) {
    throw ConfigError("federation.early_stop_tolerance must be >= 0");
  }
  if (c.threads < 1) throw ConfigError("federation.threads must be >= 1");
}

RankingParams init_global(std::size_t dimension, std::uint64_t seed) {
  if (dimension < 1) throw ConfigError("ranking dimension must be >= 1");
  Rng rng(seed);
  RankingParams params;
  params.weights.resize(dimension);
  for (double& w : params.weights) w = rng.uniform(-0.01, 0.01);
  params.weights.back() = 0.0;
  return params;
}

RankingParams aggregate(std::span<const ClientUpdate> updates,
                        AggregationRule rule) {
  if (updates.empty()) throw NoParticipantsError("aggregate: no updates");
  const std::size_t d = updates.front().params.dimension();
  double total = 0.0;
  for (const ClientUpdate& u : updates) {
    if (u.params.dimension() != d) {
      throw ShapeError("aggregate: client " + std::to_string(u.client_id) +
                       " sent dimension " +
                       std::to_string(u.params.dimension()) + ", expected " +
                       std::to_string(d));
    }
    if (u.sample_count < 1) {
      throw ConfigError("aggregate: client " + std::to_string(u.client_id) +
                        " reported zero samples");
    }
    if (!all_finite(u.params.weights)) {
      throw RejectedUpdateError(u.client_id,
                                "aggregate: rejected non-finite update from "
                                "client " +
                                    std::to_string(u.client_id));
    }
    total += rule == AggregationRule::kUniform
                 ? 1.0
                 : static_cast<double>(u.sample_count);
  }
  RankingParams out;
  out.weights.assign(d, 0.0);
  for (const ClientUpdate& u : updates) {
    const double w = (rule == AggregationRule::kUniform
                          ? 1.0
                          : static_cast<double>(u.sample_count)) /
                     total;
    for (std::size_t j = 0; j < d; ++j) out.weights[j] += w * u.params.weights[j];
  }
  return out;
}

ClientSelection sample_clients(std::span<const UserId> all_clients,
                               double fraction, double dropout_prob,
                               std::uint64_t seed, std::size_t round_index) {
  if (all_clients.empty()) throw ConfigError("sample_clients: no clients");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("sample_clients: fraction must lie in (0, 1]");
  }
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) {
    throw ConfigError("sample_clients: dropout_prob must lie in [0, 1)");
  }
  std::vector<UserId> pool(all_clients.begin(), all_clients.end());
  std::sort(pool.begin(), pool.end());
  const auto n = static_cast<double>(pool.size());
  // The epsilon keeps e.g. 0.3 * 10 from rounding up to 4.
  auto count = static_cast<std::size_t>(std::ceil(fraction * n - 1e-9));
  count = std::clamp<std::size_t>(count, 1, pool.size());

  Rng pick(derive_seed(seed, {kSampleTag, round_index}));
  for (std::size_t k = 0; k < count; ++k) {
    std::swap(pool[k], pool[k + pick.uniform_index(pool.size() - k)]);
  }
  ClientSelection sel;
  sel.sampled.assign(pool.begin(), pool.begin() + static_cast<long>(count));
  std::sort(sel.sampled.begin(), sel.sampled.end());

  Rng drop(derive_seed(seed, {kDropoutTag, round_index}));
  for (UserId id : sel.sampled) {
    if (drop.uniform01() >= dropout_prob) sel.survivors.push_back(id);
  }
  if (sel.survivors.empty()) sel.survivors.push_back(sel.sampled.front());
  return sel;
}

std::uint64_t client_seed(std::uint64_t run_seed, UserId user_id) {
  return derive_seed(run_seed, {kClientTag, static_cast<std::uint64_t>(user_id)});
}

std::uint64_t client_round_seed(const ClientState& client,
                                std::size_t round_index) {
  return derive_seed(client.rng_seed, {round_index});
}

const Message& MessageArchive::post(Message message) {
  AuditVerdict verdict = audit_message(message, *index_);
  if (is_server_bound(message.kind)) {
    bytes_up_ += message.byte_size;
  } else {
    bytes_down_ += message.byte_size;
  }
  const bool pass = verdict.pass;
  messages_.push_back(ArchivedMessage{std::move(message), std::move(verdict)});
  if (!pass) {
    const ArchivedMessage& bad = messages_.back();
    throw PrivacyViolationError(
        std::string(to_string(bad.message.kind)) + " from " +
        bad.message.sender + " failed audit: " + bad.verdict.findings.front());
  }
  return messages_.back().message;
}

std::vector<ArchivedMessage> MessageArchive::take() {
  bytes_up_ = 0;
  bytes_down_ = 0;
  return std::exchange(messages_, {});
}

void distribute_candidates(std::vector<ClientState>& clients,
                           const std::vector<CandidateSet>& candidates,
                           MessageArchive& archive) {
  std::unordered_map<UserId, const CandidateSet*> by_user;
  for (const CandidateSet& set : candidates) by_user[set.user_id] = &set;
  for (ClientState& client : clients) {
    auto it = by_user.find(client.user_id);
    if (it == by_user.end()) {
      client.candidates = CandidateSet{client.user_id, {}, false};
      continue;
    }
    client.candidates = *it->second;
    archive.post(make_message(std::string(kServerEntity),
                              client_entity(client.user_id),
                              CandidatePushPayload{client.candidates.items}));
  }
}

RoundLog run_round(ServerState& server, std::vector<ClientState>& clients,
                   const FedConfig& config, std::size_t round_index,
                   MessageArchive archive) {
  validate(config);
  std::unordered_map<UserId, std::size_t> position;
  std::vector<UserId> ids;
  for (std::size_t k = 0; k < clients.size(); ++k) {
    position[clients[k].user_id] = k;
    ids.push_back(clients[k].user_id);
  }
  const ClientSelection selection = sample_clients(
      ids, config.fraction, config.dropout_prob, config.seed, round_index);

  RoundLog log;
  log.round_index = round_index;
  log.sampled_clients = selection.sampled;

  for (UserId id : selection.sampled) {
    archive.post(make_message(std::string(kServerEntity), client_entity(id),
                              GlobalParamsPushPayload{round_index,
                                                      server.global}));
  }

  // Clients only read their own state plus the broadcast parameters.
  const std::vector<UserId>& workers = selection.survivors;
  std::vector<std::optional<LocalUpdate>> results(workers.size());
  std::vector<std::exception_ptr> errors(workers.size());
  const RankingParams broadcast = server.global;
  parallel_for(workers.size(), config.threads, [&](std::size_t k) {
    try {
      const ClientState& client = clients[position.at(workers[k])];
      results[k] = local_train(broadcast, client, config.rank,
                               client_round_seed(client, round_index));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  });
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  std::vector<ClientUpdate> updates;
  for (std::size_t k = 0; k < workers.size(); ++k) {
    if (!results[k]) continue;
    ClientState& client = clients[position.at(workers[k])];
    client.local_params = results[k]->params;
    const Message& upload = archive.post(make_message(
        client_entity(client.user_id), std::string(kServerEntity),
        LocalUpdateUploadPayload{results[k]->params,
                                 results[k]->sample_count}));
    // The server reads the update back out of what was transmitted.
    const auto& body = std::get<LocalUpdateUploadPayload>(upload.payload);
    updates.push_back(
        ClientUpdate{client.user_id, body.params, body.sample_count});
    log.participating_clients.push_back(client.user_id);
  }

  if (updates.empty()) {
    log.void_round = true;
    spdlog::warn("round {}: no client uploaded an update; round is void",
                 round_index);
  } else {
    std::sort(updates.begin(), updates.end(),
              [](const ClientUpdate& a, const ClientUpdate& b) {
                return a.client_id < b.client_id;
              });
    RankingParams next = aggregate(updates, config.aggregation);
    const double change = max_abs_diff(next.weights, server.global.weights);
    server.global = std::move(next);
    if (config.early_stop_tolerance > 0.0 &&
        change < config.early_stop_tolerance) {
      server.converged = true;
    }
  }
  server.rounds_completed += 1;
  log.bytes_up = archive.bytes_up();
  log.bytes_down = archive.bytes_down();
  log.messages = archive.take();
  log.global_params_after = server.global;
  return log;
}

std::vector<RoundLog> run_federation(ServerState& server,
                                     std::vector<ClientState>& clients,
                                     const std::vector<CandidateSet>& candidates,
                                     const FedConfig& config,
                                     const PrivateValueIndex& index) {
  validate(config);
  std::vector<RoundLog> logs;
  MessageArchive first(index);
  distribute_candidates(clients, candidates, first);
  for (std::size_t round = 1; round <= config.rounds; ++round) {
    MessageArchive archive = round == 1 ? std::move(first) : MessageArchive(index);
    logs.push_back(run_round(server, clients, config, round, std::move(archive)));
    if (server.converged) {
      spdlog::info("global parameters converged after round {}", round);
      break;
    }
  }
  return logs;
}

}  // namespace pprsf

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
#include <string>
#include <vector>

#include "pprsf/fed/audit.h"
#include "pprsf/fed/message.h"
#include "pprsf/fed/ranking_params.h"
#include "pprsf/ranker/client_ranker.h"

namespace pprsf {

enum class AggregationRule {
  kSampleWeighted,  // FedAvg: sum(n_i theta_i) / sum(n_i)
  kUniform,         // plain mean, for ablation
};

std::string to_string(AggregationRule rule);
AggregationRule aggregation_rule_from_string(const std::string& name);

struct FedConfig {
  std::size_t rounds = 20;
  RankHyper rank;
  double fraction = 1.0;      // participation fraction, (0, 1]
  double dropout_prob = 0.0;  // [0, 1)
  AggregationRule aggregation = AggregationRule::kSampleWeighted;
  // Stop once the sup-norm change of the global parameters falls below this;
  // 0 disables early stopping.
  double early_stop_tolerance = 1e-6;
  // Worker threads simulating clients. Results do not depend on it.
  std::size_t threads = 1;
  std::uint64_t seed = 0;
};

void validate(const FedConfig& config);

// Uniform(-0.01, 0.01) weights, bias coordinate (the last) zero.
RankingParams init_global(std::size_t dimension, std::uint64_t seed);

struct ClientUpdate {
  UserId client_id = 0;
  RankingParams params;
  std::size_t sample_count = 0;
};

// Throws NoParticipantsError, ShapeError, ConfigError (n_i == 0) or
// RejectedUpdateError naming the client with a non-finite entry.
RankingParams aggregate(std::span<const ClientUpdate> updates,
                        AggregationRule rule = AggregationRule::kSampleWeighted);

struct ClientSelection {
  std::vector<UserId> sampled;    // ascending id
  std::vector<UserId> survivors;  // subset of sampled, ascending id
};

// Samples ceil(fraction * N) clients without replacement, then drops each
// independently with dropout_prob. If every sampled client drops, the lowest
// id among them is kept.
ClientSelection sample_clients(std::span<const UserId> all_clients,
                               double fraction, double dropout_prob,
                               std::uint64_t seed, std::size_t round_index);

struct ArchivedMessage {
  Message message;
  AuditVerdict verdict;
};

struct RoundLog {
  std::size_t round_index = 0;
  std::vector<UserId> participating_clients;  // clients that uploaded
  std::vector<UserId> sampled_clients;
  std::vector<ArchivedMessage> messages;
  std::size_t bytes_up = 0;
  std::size_t bytes_down = 0;
  RankingParams global_params_after;
  bool void_round = false;
};

struct ServerState {
  RankingParams global;
  std::size_t rounds_completed = 0;
  bool converged = false;
};

// Per-client stream seed shared by federated and local-only training.
std::uint64_t client_seed(std::uint64_t run_seed, UserId user_id);
std::uint64_t client_round_seed(const ClientState& client,
                                std::size_t round_index);

// Archives, audits and accounts messages on behalf of the coordinator.
// Throws PrivacyViolationError as soon as a message fails its audit.
class MessageArchive {
 public:
  explicit MessageArchive(const PrivateValueIndex& index) : index_(&index) {}

  const Message& post(Message message);
  const std::vector<ArchivedMessage>& messages() const { return messages_; }
  std::size_t bytes_up() const { return bytes_up_; }
  std::size_t bytes_down() const { return bytes_down_; }
  std::vector<ArchivedMessage> take();

 private:
  const PrivateValueIndex* index_;
  std::vector<ArchivedMessage> messages_;
  std::size_t bytes_up_ = 0;
  std::size_t bytes_down_ = 0;
};

// Installs each client's candidate set and archives the CandidatePush.
void distribute_candidates(std::vector<ClientState>& clients,
                           const std::vector<CandidateSet>& candidates,
                           MessageArchive& archive);

// One federated round: GlobalParamsPush to the sampled clients, local_train
// on each survivor (in parallel when config.threads > 1), LocalUpdateUpload,
// aggregation in ascending client-id order. A round where nobody uploads is
// void and leaves the global parameters unchanged. `archive` may already
// hold messages posted earlier in the round (candidate distribution).
RoundLog run_round(ServerState& server, std::vector<ClientState>& clients,
                   const FedConfig& config, std::size_t round_index,
                   MessageArchive archive);

// Candidate distribution followed by up to config.rounds rounds (fewer when
// early stopping triggers). Candidate pushes are archived in round 1's log.
std::vector<RoundLog> run_federation(ServerState& server,
                                     std::vector<ClientState>& clients,
                                     const std::vector<CandidateSet>& candidates,
                                     const FedConfig& config,
                                     const PrivateValueIndex& index);

}  // namespace pprsf

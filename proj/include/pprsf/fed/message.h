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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pprsf/core/dataset.h"
#include "pprsf/fed/ranking_params.h"
#include "pprsf/recall/recall_model.h"

namespace pprsf {

enum class MessageKind {
  kCandidatePush,
  kGlobalParamsPush,
  kLocalUpdateUpload,
  kTopTRequest,
  kFinalListPush,
};

std::string_view to_string(MessageKind kind);
bool message_kind_from_string(std::string_view name, MessageKind* kind);

// Server-bound kinds are uploads; everything else flows server -> client.
bool is_server_bound(MessageKind kind);

struct CandidatePushPayload {
  std::vector<Candidate> candidates;
};

struct GlobalParamsPushPayload {
  std::size_t round_index = 0;
  RankingParams params;
};

// Exactly the client's parameters and its training-set size.
struct LocalUpdateUploadPayload {
  RankingParams params;
  std::size_t sample_count = 0;
};

// Item ids only: no scores, features or labels.
struct TopTRequestPayload {
  std::vector<ItemId> item_ids;

  friend bool operator==(const TopTRequestPayload&,
                         const TopTRequestPayload&) = default;
};

struct FinalListItem {
  ItemId item_id = 0;
  std::vector<double> features;
  Timestep created_at = 0;
  std::int64_t popularity_count = 0;

  friend bool operator==(const FinalListItem&, const FinalListItem&) = default;
};

struct FinalListPushPayload {
  std::vector<FinalListItem> items;

  std::vector<ItemId> item_ids() const;
};

using Payload = std::variant<CandidatePushPayload, GlobalParamsPushPayload,
                             LocalUpdateUploadPayload, TopTRequestPayload,
                             FinalListPushPayload>;

MessageKind kind_of(const Payload& payload);

inline constexpr std::string_view kServerEntity = "server";
std::string client_entity(UserId user_id);

struct Message {
  MessageKind kind = MessageKind::kCandidatePush;
  std::string sender;
  std::string receiver;
  Payload payload;
  std::size_t byte_size = 0;  // length of canonical_bytes()
};

// Fills kind and byte_size from the payload.
Message make_message(std::string sender, std::string receiver,
                     Payload payload);

// Canonical wire form: compact JSON, keys sorted, floats printed with
// shortest round-trip precision. This is what byte accounting measures and
// what the privacy audit scans.
std::string canonical_bytes(const Message& message);

}  // namespace pprsf

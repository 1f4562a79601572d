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

#include "pprsf/fed/message.h"

#include <json.hpp>

#include "pprsf/common/error.h"

namespace pprsf {

namespace {

using nlohmann::json;

json payload_json(const CandidatePushPayload& p) {
  json items = json::array();
  for (const Candidate& c : p.candidates) {
    items.push_back({{"item_id", c.item_id},
                     {"recall_score", c.recall_score},
                     {"features", c.features}});
  }
  return {{"candidates", std::move(items)}};
}

json payload_json(const GlobalParamsPushPayload& p) {
  return {{"round", p.round_index}, {"weights", p.params.weights}};
}

json payload_json(const LocalUpdateUploadPayload& p) {
  return {{"weights", p.params.weights}, {"sample_count", p.sample_count}};
}

json payload_json(const TopTRequestPayload& p) {
  return {{"item_ids", p.item_ids}};
}

json payload_json(const FinalListPushPayload& p) {
  json items = json::array();
  for (const FinalListItem& item : p.items) {
    items.push_back({{"item_id", item.item_id},
                     {"features", item.features},
                     {"created_at", item.created_at},
                     {"popularity", item.popularity_count}});
  }
  return {{"items", std::move(items)}};
}

}  // namespace

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kCandidatePush:
      return "CandidatePush";
    case MessageKind::kGlobalParamsPush:
      return "GlobalParamsPush";
    case MessageKind::kLocalUpdateUpload:
      return "LocalUpdateUpload";
    case MessageKind::kTopTRequest:
      return "TopTRequest";
    case MessageKind::kFinalListPush:
      return "FinalListPush";
  }
  return "Unknown";
}

bool message_kind_from_string(std::string_view name, MessageKind* kind) {
  for (MessageKind k :
       {MessageKind::kCandidatePush, MessageKind::kGlobalParamsPush,
        MessageKind::kLocalUpdateUpload, MessageKind::kTopTRequest,
        MessageKind::kFinalListPush}) {
    if (to_string(k) == name) {
      *kind = k;
      return true;
    }
  }
  return false;
}

bool is_server_bound(MessageKind kind) {
  return kind == MessageKind::kLocalUpdateUpload ||
         kind == MessageKind::kTopTRequest;
}

std::vector<ItemId> FinalListPushPayload::item_ids() const {
  std::vector<ItemId> ids;
  ids.reserve(items.size());
  for (const auto& item : items) ids.push_back(item.item_id);
  return ids;
}

MessageKind kind_of(const Payload& payload) {
  return static_cast<MessageKind>(payload.index());
}

std::string client_entity(UserId user_id) {
  return "client/" + std::to_string(user_id);
}

Message make_message(std::string sender, std::string receiver,
                     Payload payload) {
  Message m;
  m.kind = kind_of(payload);
  m.sender = std::move(sender);
  m.receiver = std::move(receiver);
  m.payload = std::move(payload);
  m.byte_size = canonical_bytes(m).size();
  return m;
}

std::string canonical_bytes(const Message& message) {
  json j;
  j["kind"] = std::string(to_string(message.kind));
  j["sender"] = message.sender;
  j["receiver"] = message.receiver;
  j["payload"] =
      std::visit([](const auto& p) { return payload_json(p); }, message.payload);
  return j.dump();
}

}  // namespace pprsf

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

#include "pprsf/core/dataset.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "pprsf/common/error.h"
#include "pprsf/common/numeric.h"

namespace pprsf {

namespace {

std::string marker_digest(UserId user_id, std::span<const double> values) {
  std::string text = std::to_string(user_id);
  for (double v : values) {
    text += ',';
    text += format_exact(v);
  }
  return to_hex(fnv1a64(text));
}

void check_log(const PublicUserRecord& user) {
  for (std::size_t i = 0; i < user.interaction_log.size(); ++i) {
    const Interaction& entry = user.interaction_log[i];
    if (!(entry.feedback >= 0.0 && entry.feedback <= 1.0)) {
      throw ConfigError("user " + std::to_string(user.user_id) +
                        ": feedback outside [0,1]");
    }
    if (i > 0 && entry.timestep < user.interaction_log[i - 1].timestep) {
      throw ConfigError("user " + std::to_string(user.user_id) +
                        ": interaction log not sorted by timestep");
    }
  }
}

std::shared_ptr<const std::unordered_map<UserId, std::size_t>> index_shards(
    const std::vector<PrivateShard>& shards) {
  auto pos = std::make_shared<std::unordered_map<UserId, std::size_t>>();
  for (std::size_t i = 0; i < shards.size(); ++i) {
    if (!pos->emplace(shards[i].user_id, i).second) {
      throw UniquenessError("duplicate private shard for user " +
                            std::to_string(shards[i].user_id));
    }
  }
  return pos;
}

}  // namespace

PrivateMarker PrivateMarker::seal(UserId user_id,
                                  std::span<const double> values) {
  return PrivateMarker(std::string(kPrefix) + std::to_string(user_id) + ":" +
                       marker_digest(user_id, values));
}

bool PrivateMarker::verifies(UserId user_id,
                             std::span<const double> values) const {
  return tag_ == seal(user_id, values).tag_;
}

PrivateShard PrivateShard::make(UserId user_id, std::vector<double> features) {
  PrivateShard shard;
  shard.user_id = user_id;
  shard.marker = PrivateMarker::seal(user_id, features);
  shard.private_features = std::move(features);
  return shard;
}

PublicData::PublicData(Dims dims, std::vector<ItemRecord> catalog,
                       std::vector<PublicUserRecord> public_store)
    : dims_(dims),
      catalog_(std::move(catalog)),
      public_store_(std::move(public_store)) {
  for (std::size_t i = 0; i < catalog_.size(); ++i) {
    const ItemRecord& item = catalog_[i];
    if (!item_pos_.emplace(item.item_id, i).second) {
      throw UniquenessError("duplicate item_id " +
                            std::to_string(item.item_id));
    }
    if (item.feature_vector.size() != dims_.d_item) {
      throw ShapeError("item " + std::to_string(item.item_id) + " has " +
                       std::to_string(item.feature_vector.size()) +
                       " features, catalog d_item is " +
                       std::to_string(dims_.d_item));
    }
    if (item.popularity_count < 0) {
      throw ConfigError("item " + std::to_string(item.item_id) +
                        ": negative popularity_count");
    }
  }
  for (std::size_t i = 0; i < public_store_.size(); ++i) {
    const PublicUserRecord& user = public_store_[i];
    if (!user_pos_.emplace(user.user_id, i).second) {
      throw UniquenessError("duplicate user_id " +
                            std::to_string(user.user_id));
    }
    if (user.public_features.size() != dims_.d_pub) {
      throw ShapeError("user " + std::to_string(user.user_id) +
                       ": public feature length mismatch");
    }
    check_log(user);
    for (const Interaction& entry : user.interaction_log) {
      if (!has_item(entry.item_id)) {
        throw LookupError("user " + std::to_string(user.user_id) +
                          " interacted with unknown item " +
                          std::to_string(entry.item_id));
      }
    }
  }
}

std::size_t PublicData::item_index(ItemId id) const {
  auto it = item_pos_.find(id);
  if (it == item_pos_.end()) {
    throw LookupError("unknown item_id " + std::to_string(id));
  }
  return it->second;
}

std::size_t PublicData::user_index(UserId id) const {
  auto it = user_pos_.find(id);
  if (it == user_pos_.end()) {
    throw LookupError("unknown user_id " + std::to_string(id));
  }
  return it->second;
}

Dataset Dataset::create(Dims dims, std::vector<ItemRecord> catalog,
                        std::vector<PublicUserRecord> public_store,
                        std::vector<PrivateShard> private_shards) {
  if (catalog.empty()) throw ConfigError("dataset needs at least one item");
  if (public_store.empty()) {
    throw ConfigError("dataset needs at least one user");
  }
  auto pub = std::make_shared<const PublicData>(dims, std::move(catalog),
                                                std::move(public_store));
  auto shard_pos = index_shards(private_shards);
  for (const PrivateShard& shard : private_shards) {
    if (shard.private_features.size() != dims.d_pri) {
      throw ShapeError("user " + std::to_string(shard.user_id) +
                       ": private feature length mismatch");
    }
    if (!pub->has_user(shard.user_id)) {
      throw CoverageError("user " + std::to_string(shard.user_id) +
                          " has a private shard but no public record");
    }
  }
  for (const PublicUserRecord& user : pub->public_store()) {
    if (shard_pos->count(user.user_id) == 0) {
      throw CoverageError("user " + std::to_string(user.user_id) +
                          " has a public record but no private shard");
    }
  }
  return Dataset(
      std::move(pub),
      std::make_shared<const std::vector<PrivateShard>>(
          std::move(private_shards)),
      std::move(shard_pos));
}

const PrivateShard& Dataset::shard(UserId id) const {
  auto it = shard_pos_->find(id);
  if (it == shard_pos_->end()) {
    throw LookupError("no private shard for user " + std::to_string(id));
  }
  return (*shards_)[it->second];
}

Dataset Dataset::record_interaction(UserId user_id, ItemId item_id,
                                    double feedback, Timestep timestep) const {
  const std::size_t u = public_->user_index(user_id);
  const std::size_t i = public_->item_index(item_id);
  if (!(feedback >= 0.0 && feedback <= 1.0)) {
    throw ConfigError("feedback must lie in [0,1]");
  }
  std::vector<ItemRecord> catalog = public_->catalog();
  std::vector<PublicUserRecord> store = public_->public_store();
  catalog[i].popularity_count += 1;
  auto& log = store[u].interaction_log;
  auto pos = std::upper_bound(
      log.begin(), log.end(), timestep,
      [](Timestep t, const Interaction& e) { return t < e.timestep; });
  log.insert(pos, Interaction{item_id, feedback, timestep});
  auto pub = std::make_shared<const PublicData>(dims(), std::move(catalog),
                                                std::move(store));
  return Dataset(std::move(pub), shards_, shard_pos_);
}

Dataset Dataset::with_public_store(
    std::vector<PublicUserRecord> public_store) const {
  return create(dims(), catalog(), std::move(public_store), *shards_);
}

Dataset Dataset::with_public_data(
    std::vector<ItemRecord> catalog,
    std::vector<PublicUserRecord> public_store) const {
  return create(dims(), std::move(catalog), std::move(public_store), *shards_);
}

Dataset Dataset::with_private_shards(std::vector<PrivateShard> shards) const {
  return create(dims(), catalog(), public_store(), std::move(shards));
}

}  // namespace pprsf

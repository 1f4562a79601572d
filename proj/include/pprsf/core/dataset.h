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
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pprsf {

using UserId = std::int64_t;
using ItemId = std::int64_t;
using Timestep = std::int64_t;

struct Dims {
  std::size_t d_item = 0;
  std::size_t d_pub = 0;
  std::size_t d_pri = 0;

  friend bool operator==(const Dims&, const Dims&) = default;
};

struct ItemRecord {
  ItemId item_id = 0;
  std::vector<double> feature_vector;
  std::int64_t popularity_count = 0;
  Timestep created_at = 0;

  friend bool operator==(const ItemRecord&, const ItemRecord&) = default;
};

struct Interaction {
  ItemId item_id = 0;
  double feedback = 0.0;  // in [0, 1]
  Timestep timestep = 0;

  bool positive() const { return feedback >= 0.5; }

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct PublicUserRecord {
  UserId user_id = 0;
  std::vector<double> public_features;
  std::vector<Interaction> interaction_log;  // non-decreasing timestep

  friend bool operator==(const PublicUserRecord&,
                         const PublicUserRecord&) = default;
};

// Tag carried by every private shard. The tag text starts with kPrefix so a
// byte scan of any serialized structure finds it, and embeds a digest of the
// shard contents so edits to the values are detectable.
class PrivateMarker {
 public:
  static constexpr std::string_view kPrefix = "pprsf.private-scope:";

  PrivateMarker() = default;
  static PrivateMarker seal(UserId user_id, std::span<const double> values);

  const std::string& tag() const { return tag_; }
  bool verifies(UserId user_id, std::span<const double> values) const;

  friend bool operator==(const PrivateMarker&, const PrivateMarker&) = default;

 private:
  explicit PrivateMarker(std::string tag) : tag_(std::move(tag)) {}
  std::string tag_;
};

struct PrivateShard {
  UserId user_id = 0;
  std::vector<double> private_features;
  PrivateMarker marker;

  static PrivateShard make(UserId user_id, std::vector<double> features);
  bool intact() const { return marker.verifies(user_id, private_features); }

  friend bool operator==(const PrivateShard&, const PrivateShard&) = default;
};

// Server-visible portion of a dataset: the item inventory and the public
// user store. Holds no private-scoped values by construction, so anything
// typed against PublicData cannot read private shards.
class PublicData {
 public:
  PublicData(Dims dims, std::vector<ItemRecord> catalog,
             std::vector<PublicUserRecord> public_store);

  const Dims& dims() const { return dims_; }
  const std::vector<ItemRecord>& catalog() const { return catalog_; }
  const std::vector<PublicUserRecord>& public_store() const {
    return public_store_;
  }
  std::size_t num_items() const { return catalog_.size(); }
  std::size_t num_users() const { return public_store_.size(); }

  // Positions in catalog()/public_store(); throw LookupError when unknown.
  std::size_t item_index(ItemId id) const;
  std::size_t user_index(UserId id) const;
  bool has_item(ItemId id) const { return item_pos_.count(id) != 0; }
  bool has_user(UserId id) const { return user_pos_.count(id) != 0; }

  const ItemRecord& item(ItemId id) const { return catalog_[item_index(id)]; }
  const PublicUserRecord& user(UserId id) const {
    return public_store_[user_index(id)];
  }

 private:
  friend class Dataset;

  Dims dims_;
  std::vector<ItemRecord> catalog_;
  std::vector<PublicUserRecord> public_store_;
  std::unordered_map<ItemId, std::size_t> item_pos_;
  std::unordered_map<UserId, std::size_t> user_pos_;
};

// Immutable once built. record_interaction returns a new version that shares
// the private shards with its parent.
class Dataset {
 public:
  // Empty placeholder; only valid as an assignment target.
  Dataset() = default;

  // Validates every invariant; throws UniquenessError, CoverageError,
  // ShapeError or ConfigError.
  static Dataset create(Dims dims, std::vector<ItemRecord> catalog,
                        std::vector<PublicUserRecord> public_store,
                        std::vector<PrivateShard> private_shards);

  const Dims& dims() const { return public_->dims(); }
  const PublicData& server_view() const { return *public_; }
  const std::vector<ItemRecord>& catalog() const { return public_->catalog(); }
  const std::vector<PublicUserRecord>& public_store() const {
    return public_->public_store();
  }
  const std::vector<PrivateShard>& private_shards() const { return *shards_; }

  std::size_t num_items() const { return public_->num_items(); }
  std::size_t num_users() const { return public_->num_users(); }

  const ItemRecord& item(ItemId id) const { return public_->item(id); }
  const PublicUserRecord& user(UserId id) const { return public_->user(id); }
  const PrivateShard& shard(UserId id) const;

  Dataset record_interaction(UserId user_id, ItemId item_id, double feedback,
                             Timestep timestep) const;

  // Same private shards, replaced public interaction logs. Used to carve the
  // training view out of a dataset after evaluation hold-out.
  Dataset with_public_store(std::vector<PublicUserRecord> public_store) const;
  Dataset with_public_data(std::vector<ItemRecord> catalog,
                           std::vector<PublicUserRecord> public_store) const;

  // Same public data, replaced private shards.
  Dataset with_private_shards(std::vector<PrivateShard> shards) const;

 private:
  Dataset(std::shared_ptr<const PublicData> pub,
          std::shared_ptr<const std::vector<PrivateShard>> shards,
          std::shared_ptr<const std::unordered_map<UserId, std::size_t>>
              shard_pos)
      : public_(std::move(pub)),
        shards_(std::move(shards)),
        shard_pos_(std::move(shard_pos)) {}

  std::shared_ptr<const PublicData> public_;
  std::shared_ptr<const std::vector<PrivateShard>> shards_;
  std::shared_ptr<const std::unordered_map<UserId, std::size_t>> shard_pos_;
};

}  // namespace pprsf

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
#include <string>
#include <vector>

#include "pprsf/core/dataset.h"

namespace pprsf {

struct EvalUser {
  UserId user_id = 0;
  std::vector<ItemId> positives;  // held out, never in any training input
  std::vector<ItemId> negatives;  // never interacted with by this user

  // positives and negatives, ascending item_id.
  std::vector<ItemId> pool() const;
};

struct EvalSplit {
  std::vector<EvalUser> users;  // ascending user_id
  // Input dataset minus every held-out (user, item) interaction. All
  // training happens on this view.
  Dataset train;
  std::uint64_t seed = 0;
  std::size_t holdout_per_user = 0;
  std::size_t negatives_per_positive = 0;
  std::string fingerprint;

  const EvalUser* find(UserId user_id) const;
};

// Leave-last-out: a user's last holdout_per_user positive interactions (by
// timestep, ties by item_id) become test positives, and every entry for those
// items is removed from that user's training log. Users with fewer than
// holdout_per_user + 1 interactions or fewer than holdout_per_user positives
// are not evaluated. Throws EmptyEvaluationError when nobody qualifies.
EvalSplit make_split(const Dataset& dataset, std::size_t holdout_per_user,
                     std::size_t negatives_per_positive, std::uint64_t seed);

// Hash of (seed, hold-out parameters, evaluated user ids).
std::string split_fingerprint(std::uint64_t seed, std::size_t holdout_per_user,
                              std::size_t negatives_per_positive,
                              const std::vector<UserId>& users);

}  // namespace pprsf

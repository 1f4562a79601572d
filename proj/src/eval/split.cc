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

#include "pprsf/eval/split.h"

#include <algorithm>
#include <unordered_set>

#include "pprsf/common/error.h"
#include "pprsf/common/numeric.h"
#include "pprsf/common/rng.h"

namespace pprsf {

std::vector<ItemId> EvalUser::pool() const {
  std::vector<ItemId> out = positives;
  out.insert(out.end(), negatives.begin(), negatives.end());
  std::sort(out.begin(), out.end());
  return out;
}

const EvalUser* EvalSplit::find(UserId user_id) const {
  auto it = std::lower_bound(
      users.begin(), users.end(), user_id,
      [](const EvalUser& u, UserId id) { return u.user_id < id; });
  if (it == users.end() || it->user_id != user_id) return nullptr;
  return &*it;
}

std::string split_fingerprint(std::uint64_t seed, std::size_t holdout_per_user,
                              std::size_t negatives_per_positive,
                              const std::vector<UserId>& users) {
  std::string text = "seed=" + std::to_string(seed) +
                     ";holdout=" + std::to_string(holdout_per_user) +
                     ";negatives=" + std::to_string(negatives_per_positive) +
                     ";users=";
  for (UserId id : users) text += std::to_string(id) + ",";
  return to_hex(fnv1a64(text));
}

EvalSplit make_split(const Dataset& dataset, std::size_t holdout_per_user,
                     std::size_t negatives_per_positive, std::uint64_t seed) {
  if (holdout_per_user < 1) throw ConfigError("holdout_per_user must be >= 1");
  if (negatives_per_positive < 1) {
    throw ConfigError("negatives_per_positive must be >= 1");
  }
  std::vector<PublicUserRecord> train_store = dataset.public_store();
  std::vector<ItemRecord> train_catalog = dataset.catalog();
  std::vector<EvalUser> users;
  for (PublicUserRecord& user : train_store) {
    auto& log = user.interaction_log;
    if (log.size() < holdout_per_user + 1) continue;

    std::vector<Interaction> positives;
    for (const Interaction& e : log) {
      if (e.positive()) positives.push_back(e);
    }
    std::stable_sort(positives.begin(), positives.end(),
                     [](const Interaction& a, const Interaction& b) {
                       if (a.timestep != b.timestep) {
                         return a.timestep < b.timestep;
                       }
                       return a.item_id < b.item_id;
                     });
    std::unordered_set<ItemId> held;
    for (auto it = positives.rbegin();
         it != positives.rend() && held.size() < holdout_per_user; ++it) {
      held.insert(it->item_id);
    }
    if (held.size() < holdout_per_user) continue;

    EvalUser eval;
    eval.user_id = user.user_id;
    eval.positives.assign(held.begin(), held.end());
    std::sort(eval.positives.begin(), eval.positives.end());

    std::unordered_set<ItemId> touched;
    for (const Interaction& e : log) touched.insert(e.item_id);
    std::erase_if(log, [&](const Interaction& e) {
      if (held.count(e.item_id) == 0) return false;
      auto& count = train_catalog[dataset.server_view().item_index(e.item_id)]
                        .popularity_count;
      count = std::max<std::int64_t>(0, count - 1);
      return true;
    });

    std::vector<ItemId> candidates;
    for (const ItemRecord& item : dataset.catalog()) {
      if (touched.count(item.item_id) == 0) candidates.push_back(item.item_id);
    }
    const std::size_t wanted =
        std::min(candidates.size(), negatives_per_positive * held.size());
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(user.user_id)}));
    for (std::size_t k = 0; k < wanted; ++k) {
      std::swap(candidates[k],
                candidates[k + rng.uniform_index(candidates.size() - k)]);
    }
    eval.negatives.assign(candidates.begin(),
                          candidates.begin() + static_cast<long>(wanted));
    std::sort(eval.negatives.begin(), eval.negatives.end());
    users.push_back(std::move(eval));
  }
  if (users.empty()) {
    throw EmptyEvaluationError("no user has enough interactions to evaluate");
  }
  std::sort(users.begin(), users.end(),
            [](const EvalUser& a, const EvalUser& b) {
              return a.user_id < b.user_id;
            });
  std::vector<UserId> ids;
  for (const EvalUser& u : users) ids.push_back(u.user_id);

  EvalSplit split{std::move(users), dataset.with_public_data(std::move(train_catalog), std::move(train_store)),
                  seed, holdout_per_user, negatives_per_positive, ""};
  split.fingerprint = split_fingerprint(seed, holdout_per_user,
                                        negatives_per_positive, ids);
  return split;
}

}  // namespace pprsf

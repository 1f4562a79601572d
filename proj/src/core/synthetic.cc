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

#include "pprsf/core/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pprsf/common/error.h"
#include "pprsf/common/rng.h"

namespace pprsf {

namespace {

enum StreamTag : std::uint64_t {
  kModelStream = 1,
  kItemStream = 2,
  kUserStream = 3,
};

double bilinear(std::span<const double> user, const std::vector<double>& map,
                std::span<const double> item) {
  double sum = 0.0;
  for (std::size_t r = 0; r < user.size(); ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < item.size(); ++c) {
      row += map[r * item.size() + c] * item[c];
    }
    sum += user[r] * row;
  }
  return sum;
}

std::vector<double> normal_vector(Rng& rng, std::size_t n, double scale) {
  std::vector<double> out(n);
  for (double& v : out) v = scale * rng.normal();
  return out;
}

}  // namespace

void validate(const SynthConfig& c) {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok) {
      throw ConfigError(std::string("synthetic config: ") + field + " " +
                        rule);
    }
  };
  require(c.num_users >= 2, "num_users", "must be >= 2");
  require(c.num_items >= 2, "num_items", "must be >= 2");
  require(c.d_item >= 1, "d_item", "must be >= 1");
  require(c.d_pub >= 1, "d_pub", "must be >= 1");
  require(c.d_pri >= 1, "d_pri", "must be >= 1");
  require(c.interactions_per_user >= 1, "interactions_per_user",
          "must be >= 1");
  require(c.interactions_per_user <= c.num_items, "interactions_per_user",
          "must not exceed num_items");
  require(c.preference_noise >= 0.0 && std::isfinite(c.preference_noise),
          "preference_noise", "must be finite and >= 0");
  require(std::isfinite(c.public_weight), "public_weight", "must be finite");
  require(std::isfinite(c.private_weight), "private_weight", "must be finite");
  require(std::isfinite(c.item_weight), "item_weight", "must be finite");
  require(std::isfinite(c.click_threshold), "click_threshold",
          "must be finite");
  require(c.max_created_at >= 1, "max_created_at", "must be >= 1");
  require(c.exposure_temperature >= 0.0 &&
              std::isfinite(c.exposure_temperature),
          "exposure_temperature", "must be finite and >= 0");
}

double GroundTruth::score(std::span<const double> pub,
                          std::span<const double> pri,
                          std::span<const double> item) const {
  double appeal = 0.0;
  for (std::size_t c = 0; c < item.size(); ++c) {
    appeal += item_appeal[c] * item[c];
  }
  return config.public_weight * bilinear(pub, public_map, item) +
         config.private_weight * bilinear(pri, private_map, item) +
         config.item_weight * appeal;
}

SyntheticWorld generate_synthetic_world(const SynthConfig& config,
                                        std::uint64_t seed) {
  validate(config);
  const Dims dims{config.d_item, config.d_pub, config.d_pri};

  GroundTruth truth;
  truth.config = config;
  {
    Rng rng(derive_seed(seed, {kModelStream}));
    // Scaled so each bilinear term has roughly unit variance.
    truth.public_map = normal_vector(rng, config.d_pub * config.d_item,
                                     1.0 / std::sqrt(config.d_pub * 1.0 *
                                                     config.d_item));
    truth.private_map = normal_vector(rng, config.d_pri * config.d_item,
                                      1.0 / std::sqrt(config.d_pri * 1.0 *
                                                      config.d_item));
    truth.item_appeal =
        normal_vector(rng, config.d_item, 1.0 / std::sqrt(config.d_item * 1.0));
  }

  std::vector<ItemRecord> catalog(config.num_items);
  {
    Rng rng(derive_seed(seed, {kItemStream}));
    for (std::size_t j = 0; j < config.num_items; ++j) {
      catalog[j].item_id = static_cast<ItemId>(j + 1);
      catalog[j].feature_vector = normal_vector(rng, config.d_item, 1.0);
      catalog[j].created_at = static_cast<Timestep>(
          rng.uniform_index(static_cast<std::size_t>(config.max_created_at)));
    }
  }

  std::vector<PublicUserRecord> store(config.num_users);
  std::vector<PrivateShard> shards;
  shards.reserve(config.num_users);
  std::vector<std::size_t> order(config.num_items);
  for (std::size_t u = 0; u < config.num_users; ++u) {
    Rng rng(derive_seed(seed, {kUserStream, u}));
    const UserId user_id = static_cast<UserId>(u + 1);
    store[u].user_id = user_id;
    store[u].public_features = normal_vector(rng, config.d_pub, 1.0);
    std::vector<double> pri = normal_vector(rng, config.d_pri, 1.0);

    std::iota(order.begin(), order.end(), std::size_t{0});
    if (config.exposure_temperature > 0.0) {
      // Gumbel top-k: sorting by score / tau + Gumbel noise gives a draw
      // without replacement, in draw order.
      std::vector<double> key(config.num_items);
      for (std::size_t j = 0; j < config.num_items; ++j) {
        const double s = truth.score(store[u].public_features, pri,
                                     catalog[j].feature_vector);
        const double uniform = std::max(rng.uniform01(), 1e-300);
        key[j] = s / config.exposure_temperature - std::log(-std::log(uniform));
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return key[a] > key[b];
                       });
    } else {
      // Partial Fisher-Yates: the first interactions_per_user slots are the
      // exposures, in exposure order.
      for (std::size_t k = 0; k < config.interactions_per_user; ++k) {
        const std::size_t pick = k + rng.uniform_index(config.num_items - k);
        std::swap(order[k], order[pick]);
      }
    }
    for (std::size_t k = 0; k < config.interactions_per_user; ++k) {
      const ItemRecord& item = catalog[order[k]];
      const double noisy =
          truth.score(store[u].public_features, pri, item.feature_vector) +
          config.preference_noise * rng.normal();
      const double feedback = noisy > config.click_threshold ? 1.0 : 0.0;
      store[u].interaction_log.push_back(
          Interaction{item.item_id, feedback, static_cast<Timestep>(k)});
      catalog[order[k]].popularity_count += 1;
    }
    shards.push_back(PrivateShard::make(user_id, std::move(pri)));
  }

  return SyntheticWorld{Dataset::create(dims, std::move(catalog),
                                        std::move(store), std::move(shards)),
                        std::move(truth)};
}

Dataset generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  return generate_synthetic_world(config, seed).dataset;
}

}  // namespace pprsf

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
#include <vector>

#include "pprsf/core/dataset.h"

namespace pprsf {

struct SynthConfig {
  std::size_t num_users = 50;   // N
  std::size_t num_items = 300;  // M
  std::size_t d_item = 6;
  std::size_t d_pub = 4;
  std::size_t d_pri = 4;
  std::size_t interactions_per_user = 40;
  double preference_noise = 0.5;
  // Scale of the user-feature terms in the ground-truth preference.
  double public_weight = 1.0;
  double private_weight = 1.0;
  // Scale of the user-independent item appeal term.
  double item_weight = 0.5;
  // Exposures whose noisy preference exceeds this are clicks (feedback 1).
  double click_threshold = 0.0;
  Timestep max_created_at = 100;
  // 0 = uniform exposures; > 0 samples exposures without replacement with
  // probability proportional to exp(score / exposure_temperature).
  double exposure_temperature = 0.0;
};

// Throws ConfigError naming the first offending field.
void validate(const SynthConfig& config);

// Latent preference model the generator draws labels from:
//   score(u, i) = public_weight  * pub_u^T A item_i
//               + private_weight * pri_u^T B item_i
//               + item_weight    * c^T item_i
struct GroundTruth {
  SynthConfig config;
  std::vector<double> public_map;   // d_pub x d_item, row-major
  std::vector<double> private_map;  // d_pri x d_item, row-major
  std::vector<double> item_appeal;  // d_item

  double score(std::span<const double> pub, std::span<const double> pri,
               std::span<const double> item) const;
};

struct SyntheticWorld {
  Dataset dataset;
  GroundTruth truth;
};

// Users are 1..N, items 1..M. Each user is exposed to interactions_per_user
// distinct items at timesteps 0, 1, ...; feedback is 1 for a click, 0 for
// an exposure without one. Pure function of (config, seed).
SyntheticWorld generate_synthetic_world(const SynthConfig& config,
                                        std::uint64_t seed);

Dataset generate_synthetic(const SynthConfig& config, std::uint64_t seed);

}  // namespace pprsf

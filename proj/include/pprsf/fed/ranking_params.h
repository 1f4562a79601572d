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
#include <span>
#include <vector>

namespace pprsf {

// Flat parameter vector of the ranking model. The last coordinate multiplies
// the constant 1.0 feature (bias). Global and per-client parameters share
// this type.
struct RankingParams {
  std::vector<double> weights;

  std::size_t dimension() const { return weights.size(); }
  std::size_t bias_index() const { return weights.size() - 1; }
  std::span<const double> view() const { return weights; }

  friend bool operator==(const RankingParams&, const RankingParams&) = default;
};

}  // namespace pprsf

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

#include "pprsf/eval/metrics.h"

#include <algorithm>
#include <cmath>

#include "pprsf/common/error.h"

namespace pprsf {

namespace {

std::size_t hits_in_top(std::span<const ItemId> ranked,
                        const std::unordered_set<ItemId>& relevant,
                        std::size_t k) {
  std::size_t hits = 0;
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t i = 0; i < n; ++i) hits += relevant.count(ranked[i]);
  return hits;
}

void check_k(std::size_t k) {
  if (k < 1) throw ConfigError("metric cutoff k must be >= 1");
}

}  // namespace

double precision_at_k(std::span<const ItemId> ranked,
                      const std::unordered_set<ItemId>& relevant,
                      std::size_t k) {
  check_k(k);
  if (relevant.empty()) return 0.0;
  return static_cast<double>(hits_in_top(ranked, relevant, k)) /
         static_cast<double>(k);
}

double recall_at_k(std::span<const ItemId> ranked,
                   const std::unordered_set<ItemId>& relevant, std::size_t k) {
  check_k(k);
  if (relevant.empty()) return 0.0;
  return static_cast<double>(hits_in_top(ranked, relevant, k)) /
         static_cast<double>(relevant.size());
}

double ndcg_at_k(std::span<const ItemId> ranked,
                 const std::unordered_set<ItemId>& relevant, std::size_t k) {
  check_k(k);
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (relevant.count(ranked[i]) != 0) {
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
  }
  double ideal = 0.0;
  const std::size_t ideal_hits = std::min(k, relevant.size());
  for (std::size_t i = 0; i < ideal_hits; ++i) {
    ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / ideal;
}

}  // namespace pprsf

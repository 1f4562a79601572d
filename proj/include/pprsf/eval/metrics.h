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
#include <unordered_set>

#include "pprsf/core/dataset.h"

namespace pprsf {

// All three return 0 when there is nothing relevant. k must be >= 1.
// Lists shorter than k are treated as padded with non-relevant items.

// |relevant in top k| / k
double precision_at_k(std::span<const ItemId> ranked,
                      const std::unordered_set<ItemId>& relevant,
                      std::size_t k);

// |relevant in top k| / |relevant|
double recall_at_k(std::span<const ItemId> ranked,
                   const std::unordered_set<ItemId>& relevant, std::size_t k);

// Binary-gain DCG over the top k with discount 1 / log2(position + 2),
// divided by the DCG of min(k, |relevant|) hits at the top.
double ndcg_at_k(std::span<const ItemId> ranked,
                 const std::unordered_set<ItemId>& relevant, std::size_t k);

}  // namespace pprsf

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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pprsf/core/dataset.h"

namespace pprsf {

using FeatureVector = std::vector<double>;

// How user and item features are combined into the ranking model input.
//  kConcat:            [pub | pri | item | 1]
//  kConcatWithCrosses: [pub | pri | item | (pub|pri) (x) item | 1]
// The outer-product block is what lets a linear scorer order items
// differently for different users; without it every user-side coordinate is
// a constant shift within one user's candidate list.
enum class FeatureMap { kConcat, kConcatWithCrosses };

std::string to_string(FeatureMap map);
FeatureMap feature_map_from_string(const std::string& name);

std::size_t feature_dimension(const Dims& dims, FeatureMap map);

// Private features absent (server-side public-only model) are replaced by a
// zero block of length d_pri so every model variant shares one dimension.
// Throws ShapeError on any length mismatch.
FeatureVector featurize(std::span<const double> public_features,
                        std::optional<std::span<const double>> private_features,
                        const ItemRecord& item, const Dims& dims,
                        FeatureMap map = FeatureMap::kConcat);

FeatureVector featurize(std::span<const double> public_features,
                        std::optional<std::span<const double>> private_features,
                        std::span<const double> item_features,
                        const Dims& dims, FeatureMap map = FeatureMap::kConcat);

}  // namespace pprsf

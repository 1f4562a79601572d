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

#include "pprsf/core/featurize.h"

#include "pprsf/common/error.h"

namespace pprsf {

std::string to_string(FeatureMap map) {
  switch (map) {
    case FeatureMap::kConcat:
      return "concat";
    case FeatureMap::kConcatWithCrosses:
      return "concat_cross";
  }
  return "unknown";
}

FeatureMap feature_map_from_string(const std::string& name) {
  if (name == "concat") return FeatureMap::kConcat;
  if (name == "concat_cross") return FeatureMap::kConcatWithCrosses;
  throw ConfigError("unknown feature_map '" + name +
                    "' (expected concat or concat_cross)");
}

std::size_t feature_dimension(const Dims& dims, FeatureMap map) {
  std::size_t d = dims.d_pub + dims.d_pri + dims.d_item + 1;
  if (map == FeatureMap::kConcatWithCrosses) {
    d += (dims.d_pub + dims.d_pri) * dims.d_item;
  }
  return d;
}

FeatureVector featurize(std::span<const double> public_features,
                        std::optional<std::span<const double>> private_features,
                        const ItemRecord& item, const Dims& dims,
                        FeatureMap map) {
  if (item.feature_vector.size() != dims.d_item) {
    throw ShapeError("featurize: item " + std::to_string(item.item_id) +
                     " has " + std::to_string(item.feature_vector.size()) +
                     " features, expected " + std::to_string(dims.d_item));
  }
  return featurize(public_features, private_features, item.feature_vector,
                   dims, map);
}

FeatureVector featurize(std::span<const double> public_features,
                        std::optional<std::span<const double>> private_features,
                        std::span<const double> item_features,
                        const Dims& dims, FeatureMap map) {
  if (public_features.size() != dims.d_pub) {
    throw ShapeError("featurize: public features have length " +
                     std::to_string(public_features.size()) + ", expected " +
                     std::to_string(dims.d_pub));
  }
  if (private_features && private_features->size() != dims.d_pri) {
    throw ShapeError("featurize: private features have length " +
                     std::to_string(private_features->size()) +
                     ", expected " + std::to_string(dims.d_pri));
  }
  if (item_features.size() != dims.d_item) {
    throw ShapeError("featurize: item vector has length " +
                     std::to_string(item_features.size()) + ", expected " +
                     std::to_string(dims.d_item));
  }

  FeatureVector x;
  x.reserve(feature_dimension(dims, map));
  x.insert(x.end(), public_features.begin(), public_features.end());
  if (private_features) {
    x.insert(x.end(), private_features->begin(), private_features->end());
  } else {
    x.insert(x.end(), dims.d_pri, 0.0);
  }
  x.insert(x.end(), item_features.begin(), item_features.end());
  if (map == FeatureMap::kConcatWithCrosses) {
    const std::size_t user_len = dims.d_pub + dims.d_pri;
    for (std::size_t u = 0; u < user_len; ++u) {
      const double user_value = x[u];
      for (double item_value : item_features) {
        x.push_back(user_value * item_value);
      }
    }
  }
  x.push_back(1.0);
  return x;
}

}  // namespace pprsf

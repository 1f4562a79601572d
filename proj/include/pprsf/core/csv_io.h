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

#include <filesystem>
#include <vector>

#include "pprsf/core/dataset.h"

namespace pprsf {

// File layout of a dataset on disk.
//   catalog:      item_id,created_at,popularity,f0..f{d_item-1}
//   public:       user_id,p0..p{d_pub-1}
//   interactions: user_id,item_id,feedback,timestep
//   private:      user_id,q0..q{d_pri-1}
struct DatasetPaths {
  std::filesystem::path catalog;
  std::filesystem::path public_users;
  std::filesystem::path interactions;
  std::filesystem::path private_users;

  // catalog.csv, public.csv, interactions.csv, private.csv under dir.
  static DatasetPaths in_directory(const std::filesystem::path& dir);
};

std::vector<ItemRecord> read_catalog_csv(const std::filesystem::path& path,
                                         std::size_t* d_item);
std::vector<PublicUserRecord> read_public_csv(
    const std::filesystem::path& path, std::size_t* d_pub);
// Appends each row to the matching user's log and sorts logs by timestep.
// Rows for users absent from `users` are a coverage error.
void read_interactions_csv(const std::filesystem::path& path,
                           std::vector<PublicUserRecord>& users);
std::vector<PrivateShard> read_private_csv(const std::filesystem::path& path,
                                           std::size_t* d_pri);

// Throws ParseError (file, line, column), CoverageError or UniquenessError.
Dataset load_dataset(const DatasetPaths& paths);

// Writes all four files; floats use 17 significant digits.
void write_dataset(const Dataset& dataset, const DatasetPaths& paths);

}  // namespace pprsf

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

#include "pprsf/core/csv_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "pprsf/common/error.h"
#include "pprsf/common/numeric.h"

namespace pprsf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

// Line-oriented reader that knows where it is, so every failure can name the
// file, line and 1-based column.
class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path)
      : path_(path.string()), in_(path) {
    if (!in_) throw Error("cannot open " + path_);
  }

  // Header cells; the file must not be empty.
  std::vector<std::string> header() {
    std::string line;
    if (!next_line(line)) fail(1, "missing header row");
    std::vector<std::string> out;
    for (std::string_view cell : split(line)) out.emplace_back(cell);
    return out;
  }

  bool next_row(std::vector<std::string_view>& cells) {
    if (!next_line(current_)) return false;
    cells = split(current_);
    return true;
  }

  [[noreturn]] void fail(std::size_t column, const std::string& what) const {
    throw ParseError(path_, line_no_, column, what);
  }

  std::int64_t to_int(std::string_view cell, std::size_t column) const {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(),
                                     value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() ||
        cell.empty()) {
      fail(column, "expected integer, got '" + std::string(cell) + "'");
    }
    return value;
  }

  double to_double(std::string_view cell, std::size_t column) const {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(),
                                     value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() ||
        cell.empty() || !std::isfinite(value)) {
      fail(column, "expected finite number, got '" + std::string(cell) + "'");
    }
    return value;
  }

  void expect_width(const std::vector<std::string_view>& cells,
                    std::size_t width) const {
    if (cells.size() > width) {
      fail(width + 1, "row has " + std::to_string(cells.size()) +
                          " columns, header declares " +
                          std::to_string(width));
    }
    if (cells.size() < width) {
      fail(cells.size() + 1, "row has " + std::to_string(cells.size()) +
                                 " columns, header declares " +
                                 std::to_string(width));
    }
  }

  std::size_t line() const { return line_no_; }
  const std::string& path() const { return path_; }

 private:
  bool next_line(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!trim(line).empty()) return true;
    }
    return false;
  }

  std::string path_;
  std::ifstream in_;
  std::string current_;
  std::size_t line_no_ = 0;
};

// Checks `fixed` leading names then `prefix`0..prefix{n-1}; returns n.
std::size_t check_header(CsvReader& reader,
                         const std::vector<std::string>& header,
                         std::initializer_list<std::string_view> fixed,
                         std::string_view prefix) {
  std::size_t col = 0;
  for (std::string_view name : fixed) {
    if (col >= header.size() || header[col] != name) {
      reader.fail(col + 1, "expected header column '" + std::string(name) +
                               "'");
    }
    ++col;
  }
  std::size_t n = 0;
  for (; col < header.size(); ++col, ++n) {
    const std::string expected = std::string(prefix) + std::to_string(n);
    if (header[col] != expected) {
      reader.fail(col + 1, "expected header column '" + expected + "'");
    }
  }
  return n;
}

void write_vector(std::ofstream& out, const std::vector<double>& values) {
  for (double v : values) out << ',' << format_exact(v);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
  return DatasetPaths{dir / "catalog.csv", dir / "public.csv",
                      dir / "interactions.csv", dir / "private.csv"};
}

std::vector<ItemRecord> read_catalog_csv(const std::filesystem::path& path,
                                         std::size_t* d_item) {
  CsvReader reader(path);
  const auto header = reader.header();
  const std::size_t dim =
      check_header(reader, header, {"item_id", "created_at", "popularity"}, "f");
  std::vector<ItemRecord> items;
  std::unordered_set<ItemId> seen;
  std::vector<std::string_view> cells;
  while (reader.next_row(cells)) {
    reader.expect_width(cells, 3 + dim);
    ItemRecord item;
    item.item_id = reader.to_int(cells[0], 1);
    item.created_at = reader.to_int(cells[1], 2);
    item.popularity_count = reader.to_int(cells[2], 3);
    if (item.popularity_count < 0) reader.fail(3, "negative popularity");
    for (std::size_t k = 0; k < dim; ++k) {
      item.feature_vector.push_back(reader.to_double(cells[3 + k], 4 + k));
    }
    if (!seen.insert(item.item_id).second) {
      throw UniquenessError(reader.path() + ":" +
                            std::to_string(reader.line()) +
                            ": duplicate item_id " +
                            std::to_string(item.item_id));
    }
    items.push_back(std::move(item));
  }
  if (d_item != nullptr) *d_item = dim;
  return items;
}

std::vector<PublicUserRecord> read_public_csv(
    const std::filesystem::path& path, std::size_t* d_pub) {
  CsvReader reader(path);
  const auto header = reader.header();
  const std::size_t dim = check_header(reader, header, {"user_id"}, "p");
  std::vector<PublicUserRecord> users;
  std::unordered_set<UserId> seen;
  std::vector<std::string_view> cells;
  while (reader.next_row(cells)) {
    reader.expect_width(cells, 1 + dim);
    PublicUserRecord user;
    user.user_id = reader.to_int(cells[0], 1);
    for (std::size_t k = 0; k < dim; ++k) {
      user.public_features.push_back(reader.to_double(cells[1 + k], 2 + k));
    }
    if (!seen.insert(user.user_id).second) {
      throw UniquenessError(reader.path() + ":" +
                            std::to_string(reader.line()) +
                            ": duplicate user_id " +
                            std::to_string(user.user_id));
    }
    users.push_back(std::move(user));
  }
  if (d_pub != nullptr) *d_pub = dim;
  return users;
}

void read_interactions_csv(const std::filesystem::path& path,
                           std::vector<PublicUserRecord>& users) {
  CsvReader reader(path);
  const auto header = reader.header();
  const std::size_t extra = check_header(
      reader, header, {"user_id", "item_id", "feedback", "timestep"}, "x");
  if (extra != 0) reader.fail(5, "unexpected extra header column");
  std::unordered_map<UserId, std::size_t> pos;
  for (std::size_t i = 0; i < users.size(); ++i) pos[users[i].user_id] = i;
  std::vector<std::string_view> cells;
  while (reader.next_row(cells)) {
    reader.expect_width(cells, 4);
    const UserId user_id = reader.to_int(cells[0], 1);
    Interaction entry;
    entry.item_id = reader.to_int(cells[1], 2);
    entry.feedback = reader.to_double(cells[2], 3);
    if (entry.feedback < 0.0 || entry.feedback > 1.0) {
      reader.fail(3, "feedback outside [0,1]");
    }
    entry.timestep = reader.to_int(cells[3], 4);
    auto it = pos.find(user_id);
    if (it == pos.end()) {
      throw CoverageError(reader.path() + ":" +
                          std::to_string(reader.line()) +
                          ": interaction for user " + std::to_string(user_id) +
                          " absent from the public user file");
    }
    users[it->second].interaction_log.push_back(entry);
  }
  for (PublicUserRecord& user : users) {
    std::stable_sort(user.interaction_log.begin(), user.interaction_log.end(),
                     [](const Interaction& a, const Interaction& b) {
                       return a.timestep < b.timestep;
                     });
  }
}

std::vector<PrivateShard> read_private_csv(const std::filesystem::path& path,
                                           std::size_t* d_pri) {
  CsvReader reader(path);
  const auto header = reader.header();
  const std::size_t dim = check_header(reader, header, {"user_id"}, "q");
  std::vector<PrivateShard> shards;
  std::unordered_set<UserId> seen;
  std::vector<std::string_view> cells;
  while (reader.next_row(cells)) {
    reader.expect_width(cells, 1 + dim);
    const UserId user_id = reader.to_int(cells[0], 1);
    std::vector<double> values;
    for (std::size_t k = 0; k < dim; ++k) {
      values.push_back(reader.to_double(cells[1 + k], 2 + k));
    }
    if (!seen.insert(user_id).second) {
      throw UniquenessError(reader.path() + ":" +
                            std::to_string(reader.line()) +
                            ": duplicate user_id " + std::to_string(user_id));
    }
    shards.push_back(PrivateShard::make(user_id, std::move(values)));
  }
  if (d_pri != nullptr) *d_pri = dim;
  return shards;
}

Dataset load_dataset(const DatasetPaths& paths) {
  Dims dims;
  auto catalog = read_catalog_csv(paths.catalog, &dims.d_item);
  auto users = read_public_csv(paths.public_users, &dims.d_pub);
  read_interactions_csv(paths.interactions, users);
  auto shards = read_private_csv(paths.private_users, &dims.d_pri);
  return Dataset::create(dims, std::move(catalog), std::move(users),
                         std::move(shards));
}

void write_dataset(const Dataset& dataset, const DatasetPaths& paths) {
  const Dims& dims = dataset.dims();
  {
    auto out = open_for_write(paths.catalog);
    out << "item_id,created_at,popularity";
    for (std::size_t k = 0; k < dims.d_item; ++k) out << ",f" << k;
    out << '\n';
    for (const ItemRecord& item : dataset.catalog()) {
      out << item.item_id << ',' << item.created_at << ','
          << item.popularity_count;
      write_vector(out, item.feature_vector);
      out << '\n';
    }
  }
  {
    auto out = open_for_write(paths.public_users);
    out << "user_id";
    for (std::size_t k = 0; k < dims.d_pub; ++k) out << ",p" << k;
    out << '\n';
    for (const PublicUserRecord& user : dataset.public_store()) {
      out << user.user_id;
      write_vector(out, user.public_features);
      out << '\n';
    }
  }
  {
    auto out = open_for_write(paths.interactions);
    out << "user_id,item_id,feedback,timestep\n";
    for (const PublicUserRecord& user : dataset.public_store()) {
      for (const Interaction& e : user.interaction_log) {
        out << user.user_id << ',' << e.item_id << ','
            << format_exact(e.feedback) << ',' << e.timestep << '\n';
      }
    }
  }
  {
    auto out = open_for_write(paths.private_users);
    out << "user_id";
    for (std::size_t k = 0; k < dims.d_pri; ++k) out << ",q" << k;
    out << '\n';
    for (const PrivateShard& shard : dataset.private_shards()) {
      out << shard.user_id;
      write_vector(out, shard.private_features);
      out << '\n';
    }
  }
}

}  // namespace pprsf

// Copyright 2026 The wcrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WCRISK_DATASET_HPP_
#define WCRISK_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wcrisk {

enum class ColumnType { kNumeric, kCategorical };

std::string_view column_type_name(ColumnType type);
// Accepts "numeric" or "categorical"; throws ConfigError otherwise.
ColumnType parse_column_type(std::string_view name);

// Column name -> declared type.
using Schema = std::map<std::string, ColumnType>;

// One typed column. Numeric columns fill `numeric`; categorical columns
// fill `codes` with integer level codes.
struct Column {
  std::string name;
  ColumnType type = ColumnType::kNumeric;
  std::vector<double> numeric;
  std::vector<std::int64_t> codes;

  std::size_t size() const {
    return type == ColumnType::kNumeric ? numeric.size() : codes.size();
  }
  double value(std::size_t row) const {
    return type == ColumnType::kNumeric ? numeric[row]
                                        : static_cast<double>(codes[row]);
  }

  bool operator==(const Column&) const = default;
};

// Immutable table of equal-length, uniquely named columns with no missing
// values. Missingness must be encoded upstream as explicit indicator columns.
class TabularDataset {
 public:
  TabularDataset() = default;
  // Validates lengths and name uniqueness; throws SchemaMismatch.
  explicit TabularDataset(std::vector<Column> columns);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_columns() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  std::vector<std::string> column_names() const;

  bool has_column(std::string_view name) const;
  // Throws SchemaMismatch when absent.
  const Column& column(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;

  Schema schema() const;

  bool operator==(const TabularDataset&) const = default;

 private:
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
};

// RFC-4180 CSV with a header row. The header must name exactly the schema's
// columns (any order). Numbers are parsed locale-independently; empty cells,
// non-finite numbers and non-integer categorical codes are ParseErrors.
TabularDataset parse_csv(std::string_view text, const Schema& schema);
TabularDataset load_dataset(const std::filesystem::path& path,
                            const Schema& schema);

// Writes shortest round-trip representations, so parse_csv(write_csv(d))
// reproduces d exactly.
void write_csv(const TabularDataset& dataset, std::ostream& out);
void write_csv(const TabularDataset& dataset,
               const std::filesystem::path& path);

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace wcrisk

#endif  // WCRISK_DATASET_HPP_

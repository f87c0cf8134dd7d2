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

#include "wcrisk/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "wcrisk/error.hpp"

namespace wcrisk {
namespace {

// Splits RFC-4180 text into records of fields.
class CsvReader {
 public:
  explicit CsvReader(std::string_view text) : text_(text) {
    if (text_.substr(0, 3) == "\xEF\xBB\xBF") text_.remove_prefix(3);
  }

  // Returns false at end of input. `line` receives the 1-based record index.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
            continue;
          }
          quoted = false;
          ++pos_;
          continue;
        }
        field.push_back(c);
        ++pos_;
        continue;
      }
      if (c == '"' && field.empty() && !field_started_quoted) {
        quoted = true;
        field_started_quoted = true;
        ++pos_;
        continue;
      }
      if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_started_quoted = false;
        ++pos_;
        continue;
      }
      if (c == '\r' || c == '\n') {
        ++pos_;
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        break;
      }
      field.push_back(c);
      ++pos_;
    }
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

bool is_blank_record(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_numeric_cell(std::string_view cell, std::size_t row,
                          const std::string& column) {
  cell = trim(cell);
  if (cell.empty()) throw ParseError(row, column, "missing value");
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(row, column,
                     "cannot parse '" + std::string(cell) + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw ParseError(row, column, "non-finite value");
  }
  return value;
}

std::int64_t parse_code_cell(std::string_view cell, std::size_t row,
                             const std::string& column) {
  cell = trim(cell);
  if (cell.empty()) throw ParseError(row, column, "missing value");
  if (cell.front() == '+') cell.remove_prefix(1);
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(row, column,
                     "cannot parse '" + std::string(cell) +
                         "' as an integer category code");
  }
  return value;
}

bool needs_quoting(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view s) {
  if (!needs_quoting(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::string_view column_type_name(ColumnType type) {
  return type == ColumnType::kNumeric ? "numeric" : "categorical";
}

ColumnType parse_column_type(std::string_view name) {
  if (name == "numeric") return ColumnType::kNumeric;
  if (name == "categorical") return ColumnType::kCategorical;
  throw ConfigError("unknown column type '" + std::string(name) +
                    "' (expected numeric or categorical)");
}

TabularDataset::TabularDataset(std::vector<Column> columns)
    : columns_(std::move(columns)) {
  std::set<std::string> seen;
  for (const Column& c : columns_) {
    if (!seen.insert(c.name).second) {
      throw SchemaMismatch("duplicate column name '" + c.name + "'");
    }
  }
  n_rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (const Column& c : columns_) {
    if (c.size() != n_rows_) {
      throw SchemaMismatch("column '" + c.name + "' has " +
                           std::to_string(c.size()) + " rows, expected " +
                           std::to_string(n_rows_));
    }
  }
}

std::vector<std::string> TabularDataset::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const Column& c : columns_) names.push_back(c.name);
  return names;
}

bool TabularDataset::has_column(std::string_view name) const {
  return index_of(name).has_value();
}

std::optional<std::size_t> TabularDataset::index_of(
    std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

const Column& TabularDataset::column(std::string_view name) const {
  const auto idx = index_of(name);
  if (!idx) throw SchemaMismatch("no column named '" + std::string(name) + "'");
  return columns_[*idx];
}

Schema TabularDataset::schema() const {
  Schema schema;
  for (const Column& c : columns_) schema[c.name] = c.type;
  return schema;
}

TabularDataset parse_csv(std::string_view text, const Schema& schema) {
  CsvReader reader(text);
  std::vector<std::string> fields;
  if (!reader.next(fields) || is_blank_record(fields)) {
    throw SchemaMismatch("missing header row");
  }

  std::vector<Column> columns;
  std::set<std::string> header_names;
  for (std::string& raw : fields) {
    std::string name(trim(raw));
    if (!header_names.insert(name).second) {
      throw SchemaMismatch("duplicate header column '" + name + "'");
    }
    const auto it = schema.find(name);
    if (it == schema.end()) {
      throw SchemaMismatch("column '" + name + "' is not in the schema");
    }
    Column col;
    col.name = std::move(name);
    col.type = it->second;
    columns.push_back(std::move(col));
  }
  for (const auto& [name, type] : schema) {
    if (!header_names.count(name)) {
      throw SchemaMismatch("schema column '" + name + "' is missing from the header");
    }
  }

  std::size_t row = 0;
  while (reader.next(fields)) {
    if (is_blank_record(fields)) continue;
    ++row;
    if (fields.size() != columns.size()) {
      const std::size_t bad = std::min(fields.size(), columns.size() - 1);
      throw ParseError(row, columns[bad].name,
                       "expected " + std::to_string(columns.size()) +
                           " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < columns.size(); ++j) {
      Column& col = columns[j];
      if (col.type == ColumnType::kNumeric) {
        col.numeric.push_back(parse_numeric_cell(fields[j], row, col.name));
      } else {
        col.codes.push_back(parse_code_cell(fields[j], row, col.name));
      }
    }
  }
  if (row == 0) throw EmptyDataset("dataset has no data rows");
  return TabularDataset(std::move(columns));
}

TabularDataset load_dataset(const std::filesystem::path& path,
                            const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), schema);
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_csv(const TabularDataset& dataset, std::ostream& out) {
  const auto& cols = dataset.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j) out << ',';
    write_field(out, cols[j].name);
  }
  out << '\n';
  for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) out << ',';
      if (cols[j].type == ColumnType::kNumeric) {
        out << format_double(cols[j].numeric[i]);
      } else {
        out << cols[j].codes[i];
      }
    }
    out << '\n';
  }
}

void write_csv(const TabularDataset& dataset,
               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_csv(dataset, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace wcrisk

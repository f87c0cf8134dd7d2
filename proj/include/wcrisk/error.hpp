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

#ifndef WCRISK_ERROR_HPP_
#define WCRISK_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace wcrisk {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind { kConfig, kData, kNumeric, kIo };

int exit_code_for(ErrorKind kind);
const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string type, const std::string& message)
      : std::runtime_error(message), kind_(kind), type_(std::move(type)) {}

  ErrorKind kind() const { return kind_; }
  // Short machine-readable name, e.g. "ParseError".
  const std::string& type() const { return type_; }

 private:
  ErrorKind kind_;
  std::string type_;
};

#define WCRISK_DEFINE_ERROR(Name, Kind)                   \
  class Name : public Error {                             \
   public:                                                \
    explicit Name(const std::string& message)             \
        : Error(ErrorKind::Kind, #Name, message) {}       \
  }

WCRISK_DEFINE_ERROR(ConfigError, kConfig);
WCRISK_DEFINE_ERROR(PartitionError, kConfig);
WCRISK_DEFINE_ERROR(SchemaMismatch, kData);
WCRISK_DEFINE_ERROR(EmptyDataset, kData);
WCRISK_DEFINE_ERROR(DomainError, kData);
WCRISK_DEFINE_ERROR(InsufficientData, kData);
WCRISK_DEFINE_ERROR(EmptySubsample, kData);
WCRISK_DEFINE_ERROR(DimensionMismatch, kNumeric);
WCRISK_DEFINE_ERROR(SingularSystem, kNumeric);
WCRISK_DEFINE_ERROR(NumericError, kNumeric);
WCRISK_DEFINE_ERROR(IoError, kIo);

#undef WCRISK_DEFINE_ERROR

// Malformed cell. Rows are 1-based data rows (the header is row 0).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& detail);

  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace wcrisk

#endif  // WCRISK_ERROR_HPP_

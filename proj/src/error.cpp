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

#include "wcrisk/error.hpp"

namespace wcrisk {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kData:
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kNumeric:
      return 4;
  }
  return 4;
}

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kData:
      return "data";
    case ErrorKind::kNumeric:
      return "numeric";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t row, std::string column,
                       const std::string& detail)
    : Error(ErrorKind::kData, "ParseError",
            "row " + std::to_string(row) + ", column '" + column +
                "': " + detail),
      row_(row),
      column_(std::move(column)) {}

}  // namespace wcrisk

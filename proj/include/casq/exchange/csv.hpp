// Copyright 2026 The casq Authors.
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
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "casq/core/value.hpp"

namespace casq::exchange {

// CSV as written here: a header of column names, one record per row,
// \r\n after every record. A field is quoted when it contains a comma,
// quote, CR or LF, and quotes inside are doubled. NULL is an empty field;
// an empty string is written as "" so the two stay distinct.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void header(const Schema& schema);
  void row(const Row& row);

 private:
  std::ostream& out_;
};

std::string csv_escape(std::string_view field);
std::string to_csv(const Schema& schema, const std::vector<Row>& rows);

// One parsed field: nullopt for an empty unquoted field.
using CsvField = std::optional<std::string>;
using CsvRecord = std::vector<CsvField>;

// Parses RFC 4180 style CSV (\r\n or \n line ends, a trailing line end is
// optional). BadRequest on an unterminated quote or stray characters
// after a closing quote.
std::vector<CsvRecord> parse_csv(std::string_view text);

// Text to a typed value. Integers and floats take their usual decimal
// forms, dates ISO-8601 only. An empty unquoted field is NULL.
std::optional<Value> convert_field(const CsvField& field, ColumnType type);

}  // namespace casq::exchange

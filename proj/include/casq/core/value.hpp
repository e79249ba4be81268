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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace casq {

enum class ColumnType { Integer, Float, String, Date };

std::string_view column_type_name(ColumnType type);
// Accepts the names produced by column_type_name plus common SQL spellings
// (int, real, double, text, varchar, ...). Case-insensitive.
std::optional<ColumnType> parse_column_type(std::string_view name);

struct Column {
  std::string name;
  ColumnType type = ColumnType::String;

  bool operator==(const Column&) const = default;
};

using Schema = std::vector<Column>;

// A calendar date, optionally with a UTC time of day at millisecond
// resolution. Serialized as ISO-8601: "2004-02-01" or
// "2004-02-01T10:30:00" (".123" appended when milliseconds are non-zero).
struct Date {
  std::int64_t epoch_ms = 0;
  bool has_time = false;

  static std::optional<Date> parse_iso(std::string_view text);
  std::string to_iso() const;

  bool operator==(const Date&) const = default;
};

using Null = std::monostate;
using Value = std::variant<Null, std::int64_t, double, std::string, Date>;
using Row = std::vector<Value>;

inline bool is_null(const Value& v) { return std::holds_alternative<Null>(v); }

// Text rendering used for CSV and VOTable cells. Null renders as "".
// Floats use the shortest representation that round-trips.
std::string format_value(const Value& v);

// Coerces a value to the column type where a lossless or conventional
// conversion exists (integer <-> float, anything -> string, ISO text ->
// date). Returns nullopt when no conversion applies.
std::optional<Value> coerce(const Value& v, ColumnType type);

// Milliseconds since the Unix epoch, UTC.
std::int64_t now_ms();

}  // namespace casq

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

#include "casq/exchange/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "casq/core/error.hpp"

namespace casq::exchange {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::header(const Schema& schema) {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << csv_escape(schema[i].name);
  }
  out_ << "\r\n";
}

void CsvWriter::row(const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out_ << ',';
    if (const auto* s = std::get_if<std::string>(&row[i]); s != nullptr && s->empty()) {
      out_ << "\"\"";
    } else {
      out_ << csv_escape(format_value(row[i]));
    }
  }
  out_ << "\r\n";
}

std::string to_csv(const Schema& schema, const std::vector<Row>& rows) {
  std::ostringstream os;
  CsvWriter w(os);
  w.header(schema);
  for (const auto& r : rows) w.row(r);
  return os.str();
}

std::vector<CsvRecord> parse_csv(std::string_view text) {
  std::vector<CsvRecord> out;
  CsvRecord record;
  std::size_t i = 0;
  const std::size_t n = text.size();
  if (n >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 BOM
  if (i >= n) return out;
  while (true) {
    CsvField field;
    if (i < n && text[i] == '"') {
      std::string value;
      ++i;
      while (true) {
        if (i >= n) fail(ErrorCode::BadRequest, "CSV record " + std::to_string(out.size() + 1) + ": unterminated quote");
        if (text[i] == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            value += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        value += text[i++];
      }
      if (i < n && text[i] != ',' && text[i] != '\r' && text[i] != '\n') {
        fail(ErrorCode::BadRequest, "CSV record " + std::to_string(out.size() + 1) + ": text after closing quote");
      }
      field = std::move(value);
    } else {
      const std::size_t start = i;
      while (i < n && text[i] != ',' && text[i] != '\r' && text[i] != '\n') ++i;
      if (i > start) field = std::string(text.substr(start, i - start));
    }
    record.push_back(std::move(field));
    if (i < n && text[i] == ',') {
      ++i;
      continue;
    }
    out.push_back(std::move(record));
    record.clear();
    if (i < n && text[i] == '\r') ++i;
    if (i < n && text[i] == '\n') ++i;
    if (i >= n) break;
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<Value> convert_field(const CsvField& field, ColumnType type) {
  if (!field) return Value{Null{}};
  if (type == ColumnType::String) return Value{*field};
  const std::string_view t = trim(*field);
  if (t.empty()) return Value{Null{}};
  switch (type) {
    case ColumnType::Integer: {
      std::int64_t v = 0;
      std::string_view digits = t.front() == '+' ? t.substr(1) : t;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
      return Value{v};
    }
    case ColumnType::Float: {
      const std::string s(t);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size() || s.empty()) return std::nullopt;
      if (errno == ERANGE && std::isinf(v)) return std::nullopt;
      return Value{v};
    }
    case ColumnType::Date: {
      auto d = Date::parse_iso(t);
      if (!d) return std::nullopt;
      return Value{*d};
    }
    case ColumnType::String: break;
  }
  return std::nullopt;
}

}  // namespace casq::exchange

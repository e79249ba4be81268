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

#include "casq/core/value.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>

namespace casq {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    v = v * 10 + (text[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::string_view column_type_name(ColumnType type) {
  switch (type) {
    case ColumnType::Integer: return "integer";
    case ColumnType::Float: return "float";
    case ColumnType::String: return "string";
    case ColumnType::Date: return "date";
  }
  return "string";
}

std::optional<ColumnType> parse_column_type(std::string_view name) {
  const std::string n = lower(name);
  if (n == "integer" || n == "int" || n == "bigint" || n == "smallint") return ColumnType::Integer;
  if (n == "float" || n == "real" || n == "double") return ColumnType::Float;
  if (n == "string" || n == "text" || n == "varchar" || n == "char") return ColumnType::String;
  if (n == "date" || n == "datetime" || n == "timestamp") return ColumnType::Date;
  return std::nullopt;
}

std::optional<Date> Date::parse_iso(std::string_view text) {
  using namespace std::chrono;
  int y = 0, m = 0, d = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!parse_fixed_int(text, 0, 4, y) || !parse_fixed_int(text, 5, 2, m) ||
      !parse_fixed_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;

  Date out;
  std::int64_t ms = duration_cast<milliseconds>(sys_days{ymd}.time_since_epoch()).count();
  if (text.size() == 10) {
    out.epoch_ms = ms;
    return out;
  }

  // Time part: THH:MM:SS[.f{1,3}][Z]
  std::string_view rest = text.substr(10);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  int hh = 0, mm = 0, ss = 0, frac = 0;
  if (rest.size() < 9 || rest[0] != 'T' || rest[3] != ':' || rest[6] != ':') return std::nullopt;
  if (!parse_fixed_int(rest, 1, 2, hh) || !parse_fixed_int(rest, 4, 2, mm) ||
      !parse_fixed_int(rest, 7, 2, ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  if (rest.size() > 9) {
    if (rest[9] != '.') return std::nullopt;
    const std::size_t digits = rest.size() - 10;
    if (digits < 1 || digits > 3) return std::nullopt;
    if (!parse_fixed_int(rest, 10, digits, frac)) return std::nullopt;
    for (std::size_t i = digits; i < 3; ++i) frac *= 10;
  }
  out.has_time = true;
  out.epoch_ms = ms + ((hh * 60 + mm) * 60 + ss) * 1000LL + frac;
  return out;
}

std::string Date::to_iso() const {
  using namespace std::chrono;
  const sys_time<milliseconds> tp{milliseconds{epoch_ms}};
  const auto dp = floor<days>(tp);
  const year_month_day ymd{dp};
  char buf[40];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  std::string out(buf, static_cast<std::size_t>(n));
  if (!has_time) return out;
  const auto tod = tp - dp;
  const long long total = tod.count();
  const long long hh = total / 3'600'000;
  const long long mm = (total / 60'000) % 60;
  const long long ss = (total / 1000) % 60;
  const long long frac = total % 1000;
  n = std::snprintf(buf, sizeof buf, "T%02lld:%02lld:%02lld", hh, mm, ss);
  out.append(buf, static_cast<std::size_t>(n));
  if (frac != 0) {
    n = std::snprintf(buf, sizeof buf, ".%03lld", frac);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

std::string format_value(const Value& v) {
  struct Visitor {
    std::string operator()(Null) const { return {}; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
      return std::string(buf, ptr);
    }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const Date& d) const { return d.to_iso(); }
  };
  return std::visit(Visitor{}, v);
}

std::optional<Value> coerce(const Value& v, ColumnType type) {
  if (is_null(v)) return v;
  switch (type) {
    case ColumnType::Integer:
      if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
      if (auto* d = std::get_if<double>(&v)) {
        if (*d == static_cast<double>(static_cast<std::int64_t>(*d))) {
          return static_cast<std::int64_t>(*d);
        }
      }
      return std::nullopt;
    case ColumnType::Float:
      if (auto* d = std::get_if<double>(&v)) return *d;
      if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
      return std::nullopt;
    case ColumnType::String:
      if (auto* s = std::get_if<std::string>(&v)) return *s;
      return format_value(v);
    case ColumnType::Date:
      if (auto* d = std::get_if<Date>(&v)) return *d;
      if (auto* s = std::get_if<std::string>(&v)) {
        if (auto parsed = Date::parse_iso(*s)) return *parsed;
      }
      return std::nullopt;
  }
  return std::nullopt;
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace casq

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

#include "casq/loader/validate.hpp"

#include <map>
#include <set>

#include "casq/core/digest.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::loader {

namespace {

std::optional<std::size_t> column_index(const Schema& s, const std::string& name) {
  const std::string n = sqlrewrite::to_lower(name);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (sqlrewrite::to_lower(s[i].name) == n) return i;
  }
  return std::nullopt;
}

std::optional<double> numeric(const Value& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

// Key of the given columns; nullopt if any part is NULL. Integers and
// floats with equal value give equal keys.
std::optional<std::string> key_of(const Row& row, const std::vector<std::size_t>& cols) {
  std::string key;
  for (std::size_t c : cols) {
    const Value& v = row[c];
    if (is_null(v)) return std::nullopt;
    if (auto n = numeric(v)) {
      Value norm = *n;
      key += encode_row({norm});
    } else {
      key += encode_row({v});
    }
  }
  return key;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

}  // namespace

ValidationReport validate_table(const std::string& table, const TableData& data, const std::vector<Rule>& rules,
                                const TableLookup& lookup) {
  ValidationReport rep;
  auto add = [&](RuleKind k, std::vector<std::int64_t> rows, std::string msg) {
    rep.violations.push_back({k, table, std::move(rows), std::move(msg)});
  };
  auto resolve = [&](RuleKind k, const Schema& s, const std::vector<std::string>& names,
                     const std::string& where) -> std::optional<std::vector<std::size_t>> {
    std::vector<std::size_t> out;
    for (const auto& n : names) {
      auto i = column_index(s, n);
      if (!i) {
        add(k, {}, "no column '" + n + "' in " + where);
        return std::nullopt;
      }
      out.push_back(*i);
    }
    return out;
  };

  for (const Rule& rule : rules) {
    switch (rule.kind) {
      case RuleKind::Unique: {
        auto cols = resolve(rule.kind, data.schema, rule.columns, table);
        if (!cols) break;
        std::map<std::string, std::int64_t> first;
        for (std::size_t r = 0; r < data.rows.size(); ++r) {
          auto key = key_of(data.rows[r], *cols);
          if (!key) continue;
          const auto row_no = static_cast<std::int64_t>(r + 1);
          auto [it, fresh] = first.emplace(*key, row_no);
          if (!fresh) {
            add(rule.kind, {it->second, row_no},
                "duplicate key (" + join(rule.columns) + ") in rows " + std::to_string(it->second) + " and " +
                    std::to_string(row_no));
          }
        }
        break;
      }
      case RuleKind::NotNull: {
        auto cols = resolve(rule.kind, data.schema, rule.columns, table);
        if (!cols) break;
        for (std::size_t r = 0; r < data.rows.size(); ++r) {
          for (std::size_t k = 0; k < cols->size(); ++k) {
            if (is_null(data.rows[r][(*cols)[k]])) {
              add(rule.kind, {static_cast<std::int64_t>(r + 1)},
                  "row " + std::to_string(r + 1) + ": " + rule.columns[k] + " is NULL");
            }
          }
        }
        break;
      }
      case RuleKind::Range: {
        auto cols = resolve(rule.kind, data.schema, {rule.column}, table);
        if (!cols) break;
        const std::size_t c = cols->front();
        for (std::size_t r = 0; r < data.rows.size(); ++r) {
          const Value& v = data.rows[r][c];
          if (is_null(v)) continue;
          auto n = numeric(v);
          const bool bad = !n || (rule.min && *n < *rule.min) || (rule.max && *n > *rule.max);
          if (bad) {
            add(rule.kind, {static_cast<std::int64_t>(r + 1)},
                "row " + std::to_string(r + 1) + ": " + rule.column + " = " + format_value(v) + " out of range");
          }
        }
        break;
      }
      case RuleKind::ForeignKey: {
        auto cols = resolve(rule.kind, data.schema, rule.columns, table);
        if (!cols) break;
        std::optional<TableData> ref = lookup ? lookup(rule.ref_table) : std::nullopt;
        if (!ref) {
          add(rule.kind, {}, "referenced table '" + rule.ref_table + "' not found");
          break;
        }
        auto ref_cols = resolve(rule.kind, ref->schema, rule.ref_columns, rule.ref_table);
        if (!ref_cols) break;
        std::set<std::string> keys;
        for (const auto& row : ref->rows) {
          if (auto k = key_of(row, *ref_cols)) keys.insert(*k);
        }
        for (std::size_t r = 0; r < data.rows.size(); ++r) {
          auto key = key_of(data.rows[r], *cols);
          if (key && !keys.count(*key)) {
            add(rule.kind, {static_cast<std::int64_t>(r + 1)},
                "row " + std::to_string(r + 1) + ": (" + join(rule.columns) + ") has no match in " + rule.ref_table);
          }
        }
        break;
      }
    }
  }
  return rep;
}

}  // namespace casq::loader

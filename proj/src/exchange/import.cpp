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

#include "casq/exchange/import.hpp"

#include <map>

#include "casq/core/error.hpp"
#include "casq/exchange/csv.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::exchange {

namespace {

std::string trimmed_lower(const CsvField& f) {
  if (!f) return {};
  std::string_view s = *f;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return sqlrewrite::to_lower(s);
}

bool blank(const CsvRecord& r) { return r.size() == 1 && !r[0]; }

}  // namespace

ImportResult import_csv(mydb::MyDbManager& mydb, std::string_view user, std::string_view table,
                        std::string_view csv) {
  const std::string name = mydb::normalize_table_name(table);
  auto info = mydb.find_table(user, name);
  if (!info) {
    fail(ErrorCode::NoSuchTable,
         "MyDB table '" + name + "' does not exist; create it first so its column types drive the import "
         "(an untyped import would yield all-string columns with column names like col5)");
  }
  const Schema& schema = info->columns;
  const auto records = parse_csv(csv);
  if (records.empty()) fail(ErrorCode::ArityMismatch, "CSV file has no header row");

  const CsvRecord& header = records.front();
  if (header.size() != schema.size()) {
    fail(ErrorCode::ArityMismatch, "header has " + std::to_string(header.size()) + " columns, table '" + name +
                                       "' has " + std::to_string(schema.size()));
  }
  std::map<std::string, std::size_t> column_index;
  for (std::size_t i = 0; i < schema.size(); ++i) column_index[sqlrewrite::to_lower(schema[i].name)] = i;
  // position in file -> column index
  std::vector<std::size_t> target(header.size());
  std::vector<bool> seen(schema.size(), false);
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h = trimmed_lower(header[i]);
    auto it = column_index.find(h);
    if (it == column_index.end() || seen[it->second]) {
      fail(ErrorCode::ArityMismatch, "header column '" + h + "' does not match a column of '" + name + "'");
    }
    seen[it->second] = true;
    target[i] = it->second;
  }

  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const CsvRecord& rec = records[r];
    if (blank(rec) && schema.size() > 1) continue;
    if (rec.size() != schema.size()) {
      fail(ErrorCode::ArityMismatch, "row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                                         " fields, expected " + std::to_string(schema.size()));
    }
    Row row(schema.size());
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const Column& col = schema[target[i]];
      auto v = convert_field(rec[i], col.type);
      if (!v) {
        fail(ErrorCode::TypeMismatch, "row " + std::to_string(r) + " column " + std::to_string(i + 1) + " (" +
                                          col.name + "): '" + rec[i].value_or("") + "' is not a valid " +
                                          std::string(column_type_name(col.type)));
      }
      row[target[i]] = std::move(*v);
    }
    rows.push_back(std::move(row));
  }

  ImportResult out;
  out.rows = static_cast<std::int64_t>(rows.size());
  out.table = mydb.append_rows(user, name, rows);
  return out;
}

}  // namespace casq::exchange

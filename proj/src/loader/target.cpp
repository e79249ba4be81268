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

#include "casq/loader/target.hpp"

#include <algorithm>

#include "casq/core/digest.hpp"
#include "casq/core/error.hpp"

namespace casq::loader {

std::optional<Schema> sqlite_table_schema(sqlite::Database& db, const std::string& table) {
  if (!db.table_exists(table)) return std::nullopt;
  Schema s;
  auto st = db.prepare("SELECT name, type FROM pragma_table_info(?1) ORDER BY cid");
  st.bind(1, table);
  while (st.step()) {
    s.push_back({st.column_text(0), parse_column_type(st.column_text(1)).value_or(ColumnType::String)});
  }
  return s;
}

void sqlite_read_table(sqlite::Database& db, const std::string& table, const Schema& schema, std::size_t batch,
                       const BatchFn& fn) {
  auto st = db.prepare("SELECT * FROM " + sqlite::quote_ident(table) + " ORDER BY rowid");
  std::vector<Row> rows;
  bool delivered = false;
  while (st.step()) {
    Row r;
    for (std::size_t i = 0; i < schema.size(); ++i) r.push_back(st.column_value(static_cast<int>(i), schema[i].type));
    rows.push_back(std::move(r));
    if (rows.size() >= batch) {
      fn(schema, rows);
      rows.clear();
      delivered = true;
    }
  }
  if (!rows.empty() || !delivered) fn(schema, rows);
}

std::vector<std::string> sqlite_user_tables(sqlite::Database& db) {
  std::vector<std::string> out;
  auto st = db.prepare(
      "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite\\_%' ESCAPE '\\' "
      "AND name NOT LIKE '\\_casq%' ESCAPE '\\' ORDER BY name");
  while (st.step()) out.push_back(st.column_text(0));
  return out;
}

std::string StateDigest::hash() const {
  std::string text;
  for (const auto& e : entries) {
    text += e.area + '\x1f' + e.table + '\x1f' + std::to_string(e.rows) + '\x1f' + e.content_hash + '\x1e';
  }
  return sha256_hex(text);
}

// MyDbLoadTarget

std::vector<std::string> MyDbLoadTarget::tables() {
  std::vector<std::string> out;
  for (const auto& [name, info] : mydb_.info(user_).tables) out.push_back(name);
  return out;
}

std::optional<Schema> MyDbLoadTarget::schema(const std::string& table) {
  auto t = mydb_.find_table(user_, table);
  if (!t) return std::nullopt;
  return t->columns;
}

void MyDbLoadTarget::read(const std::string& table, const BatchFn& fn) { mydb_.read_table(user_, table, 1024, fn); }

void MyDbLoadTarget::create(const std::string& table, const Schema& schema, const std::vector<Row>& rows) {
  mydb_.select_into(user_, table, schema, rows);
}

std::vector<std::int64_t> MyDbLoadTarget::append(const std::string& table, const std::vector<Row>& rows) {
  std::vector<std::int64_t> ids;
  mydb_.append_rows(user_, table, rows, &ids);
  return ids;
}

void MyDbLoadTarget::remove_rows(const std::string& table, const std::vector<std::int64_t>& rowids) {
  mydb_.delete_rows(user_, table, rowids);
}

void MyDbLoadTarget::drop(const std::string& table) { mydb_.drop_table(user_, table); }

// DatabaseLoadTarget

DatabaseLoadTarget::DatabaseLoadTarget(std::filesystem::path path) : path_(std::move(path)), db_(path_) {}

std::vector<std::string> DatabaseLoadTarget::tables() {
  std::lock_guard lock(mu_);
  return sqlite_user_tables(db_);
}

std::optional<Schema> DatabaseLoadTarget::schema(const std::string& table) {
  std::lock_guard lock(mu_);
  return sqlite_table_schema(db_, table);
}

void DatabaseLoadTarget::read(const std::string& table, const BatchFn& fn) {
  std::lock_guard lock(mu_);
  auto s = sqlite_table_schema(db_, table);
  if (!s) fail(ErrorCode::NoSuchTable, "no table " + table + " in " + path_.string());
  sqlite_read_table(db_, table, *s, 1024, fn);
}

namespace {

std::vector<std::int64_t> insert_rows(sqlite::Database& db, const std::string& table, const Schema& schema,
                                      const std::vector<Row>& rows) {
  std::string ins = "INSERT INTO " + sqlite::quote_ident(table) + " VALUES (";
  for (std::size_t i = 0; i < schema.size(); ++i) ins += (i ? ", ?" : "?") + std::to_string(i + 1);
  auto st = db.prepare(ins + ")");
  std::vector<std::int64_t> ids;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.size()) {
      fail(ErrorCode::ArityMismatch, "row " + std::to_string(r + 1) + " does not match " + table);
    }
    st.reset();
    for (std::size_t i = 0; i < schema.size(); ++i) {
      auto v = coerce(rows[r][i], schema[i].type);
      if (!v) {
        fail(ErrorCode::TypeMismatch, "row " + std::to_string(r + 1) + " column " + schema[i].name +
                                          ": cannot convert '" + format_value(rows[r][i]) + "'");
      }
      st.bind(static_cast<int>(i + 1), *v);
    }
    st.run();
    ids.push_back(db.last_insert_rowid());
  }
  return ids;
}

}  // namespace

void DatabaseLoadTarget::create(const std::string& table, const Schema& schema, const std::vector<Row>& rows) {
  std::lock_guard lock(mu_);
  sqlite::Transaction txn(db_);
  if (db_.table_exists(table)) fail(ErrorCode::TableExists, "table " + table + " already exists");
  std::string ddl = "CREATE TABLE " + sqlite::quote_ident(table) + " (";
  for (std::size_t i = 0; i < schema.size(); ++i) {
    ddl += (i ? ", " : "") + sqlite::quote_ident(schema[i].name) + " " + std::string(sqlite::sql_type(schema[i].type));
  }
  db_.exec(ddl + ")");
  insert_rows(db_, table, schema, rows);
  txn.commit();
}

std::vector<std::int64_t> DatabaseLoadTarget::append(const std::string& table, const std::vector<Row>& rows) {
  std::lock_guard lock(mu_);
  sqlite::Transaction txn(db_);
  auto s = sqlite_table_schema(db_, table);
  if (!s) fail(ErrorCode::NoSuchTable, "no table " + table + " in " + path_.string());
  auto ids = insert_rows(db_, table, *s, rows);
  txn.commit();
  return ids;
}

void DatabaseLoadTarget::remove_rows(const std::string& table, const std::vector<std::int64_t>& rowids) {
  std::lock_guard lock(mu_);
  sqlite::Transaction txn(db_);
  auto st = db_.prepare("DELETE FROM " + sqlite::quote_ident(table) + " WHERE rowid = ?1");
  for (std::int64_t id : rowids) {
    st.reset();
    st.bind(1, id);
    st.run();
  }
  txn.commit();
}

void DatabaseLoadTarget::drop(const std::string& table) {
  std::lock_guard lock(mu_);
  db_.exec("DROP TABLE IF EXISTS " + sqlite::quote_ident(table));
}

}  // namespace casq::loader

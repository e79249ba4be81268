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

#include "casq/mydb/mydb.hpp"

#include <chrono>
#include <optional>

#include "casq/core/error.hpp"
#include "casq/mydb/accounting.hpp"
#include "casq/sqlrewrite/rewrite.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::mydb {

namespace {

constexpr auto kLockWait = std::chrono::seconds(60);

constexpr std::string_view kMetaSchema = R"sql(
  CREATE TABLE IF NOT EXISTS _casq_tables (
    name TEXT PRIMARY KEY,
    row_count INTEGER NOT NULL,
    byte_size INTEGER NOT NULL,
    created_at INTEGER NOT NULL
  );
  CREATE TABLE IF NOT EXISTS _casq_columns (
    table_name TEXT NOT NULL,
    ordinal INTEGER NOT NULL,
    name TEXT NOT NULL,
    type TEXT NOT NULL,
    PRIMARY KEY (table_name, ordinal)
  );
)sql";

Schema load_schema(sqlite::Database& db, const std::string& table) {
  Schema schema;
  auto st = db.prepare("SELECT name, type FROM _casq_columns WHERE table_name = ?1 ORDER BY ordinal");
  st.bind(1, table);
  while (st.step()) {
    auto type = parse_column_type(st.column_text(1));
    schema.push_back({st.column_text(0), type.value_or(ColumnType::String)});
  }
  return schema;
}

std::optional<TableInfo> load_table(sqlite::Database& db, const std::string& table) {
  auto st = db.prepare("SELECT row_count, byte_size, created_at FROM _casq_tables WHERE name = ?1");
  st.bind(1, table);
  if (!st.step()) return std::nullopt;
  TableInfo info;
  info.name = table;
  info.row_count = st.column_int64(0);
  info.byte_size = st.column_int64(1);
  info.created_at = st.column_int64(2);
  info.columns = load_schema(db, table);
  return info;
}

std::int64_t used_bytes(sqlite::Database& db) {
  auto st = db.prepare("SELECT COALESCE(SUM(byte_size), 0) FROM _casq_tables");
  st.step();
  return st.column_int64(0);
}

Schema dedupe_columns(const Schema& in) {
  Schema out;
  std::set<std::string> seen;
  for (const auto& c : in) {
    std::string base = sqlrewrite::to_lower(c.name.empty() ? "col" : c.name);
    std::string name = base;
    for (int n = 2; seen.count(name) != 0; ++n) name = base + "_" + std::to_string(n);
    seen.insert(name);
    out.push_back({name, c.type});
  }
  return out;
}

}  // namespace

std::string normalize_table_name(std::string_view name) {
  std::string out = sqlrewrite::to_lower(name);
  bool ok = !out.empty() && !(out[0] >= '0' && out[0] <= '9');
  for (char c : out) ok = ok && ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_');
  if (!ok || out.rfind("_casq", 0) == 0 || out.rfind("sqlite_", 0) == 0) {
    fail(ErrorCode::BadRequest, "invalid table name '" + std::string(name) + "'");
  }
  return out;
}

struct TableWriter::State {
  std::unique_lock<std::timed_mutex> lock;
  MyDbManager* owner = nullptr;
  std::string user;
  std::string table;
  sqlite::Database db;
  std::optional<sqlite::Transaction> txn;
  std::optional<sqlite::Statement> insert;
  std::int64_t used_before = 0;
  std::int64_t quota = 0;
};

TableWriter::TableWriter(std::unique_ptr<State> s) : s_(std::move(s)) {}
TableWriter::TableWriter(TableWriter&&) noexcept = default;
TableWriter::~TableWriter() = default;

void TableWriter::append(const std::vector<Row>& batch) {
  if (!s_) fail(ErrorCode::StorageFailure, "table writer is closed");
  for (const Row& row : batch) {
    if (row.size() != schema_.size()) {
      abort();
      fail(ErrorCode::ArityMismatch, "row has " + std::to_string(row.size()) + " values, table has " +
                                         std::to_string(schema_.size()) + " columns");
    }
    Row typed;
    typed.reserve(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      auto v = coerce(row[i], schema_[i].type);
      if (!v) {
        abort();
        fail(ErrorCode::TypeMismatch, "value '" + format_value(row[i]) + "' does not fit column " +
                                          schema_[i].name + " (" +
                                          std::string(column_type_name(schema_[i].type)) + ")");
      }
      typed.push_back(std::move(*v));
    }
    auto& st = *s_->insert;
    st.reset();
    for (std::size_t i = 0; i < typed.size(); ++i) st.bind(static_cast<int>(i + 1), typed[i]);
    st.run();
    bytes_ += row_bytes(schema_, typed);
    ++rows_;
  }
  if (s_->used_before + bytes_ > s_->quota) {
    const std::string msg = "MyDB quota exceeded for " + s_->user + ": " +
                            std::to_string(s_->used_before + bytes_) + " > " + std::to_string(s_->quota) +
                            " bytes";
    abort();
    fail(ErrorCode::QuotaExceeded, msg);
  }
}

TableInfo TableWriter::commit() {
  if (!s_) fail(ErrorCode::StorageFailure, "table writer is closed");
  TableInfo info;
  info.name = s_->table;
  info.columns = schema_;
  info.row_count = rows_;
  info.byte_size = bytes_;
  info.created_at = now_ms();
  s_->insert.reset();
  auto st = s_->db.prepare("INSERT INTO _casq_tables (name, row_count, byte_size, created_at) VALUES (?1, ?2, ?3, ?4)");
  st.bind(1, info.name).bind(2, info.row_count).bind(3, info.byte_size).bind(4, info.created_at).run();
  auto col = s_->db.prepare("INSERT INTO _casq_columns (table_name, ordinal, name, type) VALUES (?1, ?2, ?3, ?4)");
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    col.reset();
    col.bind(1, info.name)
        .bind(2, static_cast<std::int64_t>(i))
        .bind(3, schema_[i].name)
        .bind(4, column_type_name(schema_[i].type))
        .run();
  }
  s_->txn->commit();
  s_.reset();
  return info;
}

void TableWriter::abort() { s_.reset(); }

MyDbManager::MyDbManager(Store& store, std::filesystem::path root) : store_(store), root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path MyDbManager::file_path(std::string_view user) const {
  return root_ / (sqlrewrite::physical_database(user) + ".db");
}

std::unique_lock<std::timed_mutex> MyDbManager::lock_user(const std::string& user) {
  std::timed_mutex* m;
  {
    std::lock_guard g(locks_mu_);
    auto& slot = locks_[user];
    if (!slot) slot = std::make_unique<std::timed_mutex>();
    m = slot.get();
  }
  std::unique_lock lock(*m, std::defer_lock);
  if (!lock.try_lock_for(kLockWait)) {
    fail(ErrorCode::StorageFailure, "MyDB of " + user + " is busy");
  }
  return lock;
}

sqlite::Database MyDbManager::open(const std::string& user) {
  sqlite::Database db(file_path(user));
  db.exec(kMetaSchema);
  return db;
}

std::map<std::string, TableInfo> MyDbManager::load_tables(sqlite::Database& db, const std::string& user) {
  std::map<std::string, TableInfo> out;
  auto st = db.prepare("SELECT name FROM _casq_tables ORDER BY name");
  std::vector<std::string> names;
  while (st.step()) names.push_back(st.column_text(0));
  for (const auto& n : names) {
    auto info = load_table(db, n);
    if (!info) continue;
    if (publications_) info->published_to = publications_(user, n);
    out.emplace(n, std::move(*info));
  }
  return out;
}

MyDbInfo MyDbManager::ensure_mydb(std::string_view user_in) {
  const UserAccount account = store_.get_user(user_in);
  const std::string& user = account.user_id;
  MyDbInfo info;
  info.user_id = user;
  info.physical_name = sqlrewrite::physical_database(user);
  info.quota_bytes = account.quota_bytes;
  {
    auto lock = lock_user(user);
    auto db = open(user);
    info.used_bytes = used_bytes(db);
    info.tables = load_tables(db, user);
  }
  if (!account.mydb_created) store_.set_mydb_created(user);
  return info;
}

MyDbInfo MyDbManager::info(std::string_view user) { return ensure_mydb(user); }

std::optional<TableInfo> MyDbManager::find_table(std::string_view user_in, std::string_view table_in) {
  const std::string user = normalize_user_id(user_in);
  std::string table;
  try {
    table = normalize_table_name(table_in);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!std::filesystem::exists(file_path(user))) return std::nullopt;
  auto db = open(user);
  auto info = load_table(db, table);
  if (info && publications_) info->published_to = publications_(user, table);
  return info;
}

bool MyDbManager::table_exists(std::string_view user, std::string_view table) {
  return find_table(user, table).has_value();
}

TableInfo MyDbManager::get_table(std::string_view user, std::string_view table) {
  auto info = find_table(user, table);
  if (!info) fail(ErrorCode::NoSuchTable, "no table " + std::string(table) + " in MyDB of " + std::string(user));
  return *info;
}

TableWriter MyDbManager::create_table(std::string_view user_in, std::string_view table_in, const Schema& schema) {
  const std::string table = normalize_table_name(table_in);
  if (schema.empty()) fail(ErrorCode::BadRequest, "a table needs at least one column");
  const MyDbInfo mine = ensure_mydb(user_in);

  auto s = std::make_unique<TableWriter::State>();
  s->lock = lock_user(mine.user_id);
  s->owner = this;
  s->user = mine.user_id;
  s->table = table;
  s->db = open(mine.user_id);
  s->txn.emplace(s->db);
  if (load_table(s->db, table) || s->db.table_exists(table)) {
    fail(ErrorCode::TableExists, "table " + table + " already exists in MyDB");
  }
  const Schema cols = dedupe_columns(schema);
  std::string ddl = "CREATE TABLE " + sqlite::quote_ident(table) + " (";
  std::string ins = "INSERT INTO " + sqlite::quote_ident(table) + " VALUES (";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i > 0) {
      ddl += ", ";
      ins += ", ";
    }
    ddl += sqlite::quote_ident(cols[i].name) + " " + std::string(sqlite::sql_type(cols[i].type));
    ins += "?" + std::to_string(i + 1);
  }
  s->db.exec(ddl + ")");
  s->insert.emplace(s->db.prepare(ins + ")"));
  s->used_before = used_bytes(s->db);
  s->quota = store_.get_user(mine.user_id).quota_bytes;

  TableWriter w(std::move(s));
  w.schema_ = cols;
  return w;
}

TableInfo MyDbManager::select_into(std::string_view user, std::string_view table, const Schema& schema,
                                   const std::vector<Row>& rows) {
  auto w = create_table(user, table, schema);
  w.append(rows);
  return w.commit();
}

TableInfo MyDbManager::append_rows(std::string_view user_in, std::string_view table_in,
                                   const std::vector<Row>& rows, std::vector<std::int64_t>* rowids) {
  const std::string table = normalize_table_name(table_in);
  const MyDbInfo mine = ensure_mydb(user_in);
  auto lock = lock_user(mine.user_id);
  auto db = open(mine.user_id);
  sqlite::Transaction txn(db);
  auto info = load_table(db, table);
  if (!info) fail(ErrorCode::NoSuchTable, "no table " + table + " in MyDB");
  const Schema& schema = info->columns;
  std::string ins = "INSERT INTO " + sqlite::quote_ident(table) + " VALUES (";
  for (std::size_t i = 0; i < schema.size(); ++i) ins += (i ? ", ?" : "?") + std::to_string(i + 1);
  auto st = db.prepare(ins + ")");
  std::int64_t bytes = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (row.size() != schema.size()) {
      fail(ErrorCode::ArityMismatch, "row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                                         " values, table has " + std::to_string(schema.size()) + " columns");
    }
    Row typed;
    for (std::size_t i = 0; i < row.size(); ++i) {
      auto v = coerce(row[i], schema[i].type);
      if (!v) {
        fail(ErrorCode::TypeMismatch, "row " + std::to_string(r + 1) + " column " + std::to_string(i + 1) +
                                          " (" + schema[i].name + "): cannot convert '" + format_value(row[i]) +
                                          "' to " + std::string(column_type_name(schema[i].type)));
      }
      typed.push_back(std::move(*v));
    }
    st.reset();
    for (std::size_t i = 0; i < typed.size(); ++i) st.bind(static_cast<int>(i + 1), typed[i]);
    st.run();
    if (rowids) rowids->push_back(db.last_insert_rowid());
    bytes += row_bytes(schema, typed);
  }
  const std::int64_t used = used_bytes(db);
  if (used + bytes > mine.quota_bytes) {
    fail(ErrorCode::QuotaExceeded, "MyDB quota exceeded for " + mine.user_id + ": " +
                                       std::to_string(used + bytes) + " > " + std::to_string(mine.quota_bytes) +
                                       " bytes");
  }
  db.prepare("UPDATE _casq_tables SET row_count = row_count + ?1, byte_size = byte_size + ?2 WHERE name = ?3")
      .bind(1, static_cast<std::int64_t>(rows.size()))
      .bind(2, bytes)
      .bind(3, table)
      .run();
  txn.commit();
  info->row_count += static_cast<std::int64_t>(rows.size());
  info->byte_size += bytes;
  if (publications_) info->published_to = publications_(mine.user_id, table);
  return *info;
}

TableInfo MyDbManager::delete_rows(std::string_view user_in, std::string_view table_in,
                                   const std::vector<std::int64_t>& rowids) {
  const std::string table = normalize_table_name(table_in);
  const MyDbInfo mine = ensure_mydb(user_in);
  auto lock = lock_user(mine.user_id);
  auto db = open(mine.user_id);
  sqlite::Transaction txn(db);
  auto info = load_table(db, table);
  if (!info) fail(ErrorCode::NoSuchTable, "no table " + table + " in MyDB");
  const Schema& schema = info->columns;
  auto sel = db.prepare("SELECT * FROM " + sqlite::quote_ident(table) + " WHERE rowid = ?1");
  auto del = db.prepare("DELETE FROM " + sqlite::quote_ident(table) + " WHERE rowid = ?1");
  std::int64_t bytes = 0;
  std::int64_t count = 0;
  for (std::int64_t id : rowids) {
    sel.reset();
    sel.bind(1, id);
    if (!sel.step()) continue;
    Row row;
    for (std::size_t i = 0; i < schema.size(); ++i) row.push_back(sel.column_value(static_cast<int>(i), schema[i].type));
    bytes += row_bytes(schema, row);
    ++count;
    del.reset();
    del.bind(1, id);
    del.run();
  }
  db.prepare("UPDATE _casq_tables SET row_count = row_count - ?1, byte_size = byte_size - ?2 WHERE name = ?3")
      .bind(1, count)
      .bind(2, bytes)
      .bind(3, table)
      .run();
  txn.commit();
  info->row_count -= count;
  info->byte_size -= bytes;
  if (publications_) info->published_to = publications_(mine.user_id, table);
  return *info;
}

std::int64_t MyDbManager::drop_table(std::string_view user_in, std::string_view table_in) {
  const std::string user = normalize_user_id(user_in);
  const std::string table = normalize_table_name(table_in);
  store_.get_user(user);
  std::int64_t freed = 0;
  {
    auto lock = lock_user(user);
    auto db = open(user);
    sqlite::Transaction txn(db);
    auto info = load_table(db, table);
    if (!info) fail(ErrorCode::NoSuchTable, "no table " + table + " in MyDB");
    freed = info->byte_size;
    db.exec("DROP TABLE IF EXISTS " + sqlite::quote_ident(table));
    db.prepare("DELETE FROM _casq_tables WHERE name = ?1").bind(1, table).run();
    db.prepare("DELETE FROM _casq_columns WHERE table_name = ?1").bind(1, table).run();
    txn.commit();
  }
  if (drop_hook_) drop_hook_(user, table);
  return freed;
}

void MyDbManager::read_table(std::string_view user_in, std::string_view table_in, std::size_t batch_rows,
                             const std::function<void(const Schema&, const std::vector<Row>&)>& fn) {
  const std::string user = normalize_user_id(user_in);
  const TableInfo info = get_table(user, table_in);
  auto db = open(user);
  auto st = db.prepare("SELECT * FROM " + sqlite::quote_ident(info.name) + " ORDER BY rowid");
  std::vector<Row> batch;
  if (batch_rows == 0) batch_rows = 1;
  while (st.step()) {
    Row row;
    for (std::size_t i = 0; i < info.columns.size(); ++i) {
      row.push_back(st.column_value(static_cast<int>(i), info.columns[i].type));
    }
    batch.push_back(std::move(row));
    if (batch.size() >= batch_rows) {
      fn(info.columns, batch);
      batch.clear();
    }
  }
  if (!batch.empty() || info.row_count == 0) fn(info.columns, batch);
}

std::map<std::string, std::int64_t> MyDbManager::recompute_sizes(std::string_view user) {
  std::map<std::string, std::int64_t> out;
  for (const auto& [name, info] : ensure_mydb(user).tables) {
    std::int64_t total = 0;
    read_table(user, name, 1024, [&](const Schema& schema, const std::vector<Row>& rows) {
      for (const auto& r : rows) total += row_bytes(schema, r);
    });
    out[name] = total;
  }
  return out;
}

}  // namespace casq::mydb

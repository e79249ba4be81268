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

#include "casq/core/sqlite.hpp"

#include <sqlite3.h>

#include <utility>

#include "casq/core/error.hpp"

namespace casq::sqlite {

namespace {

constexpr std::string_view kCodeTag = "[casq:";

// Rethrows a tagged callback error under its own code.
void rethrow_tagged(const std::string& detail) {
  const auto at = detail.find(kCodeTag);
  if (at == std::string::npos) return;
  const auto end = detail.find("] ", at);
  if (end == std::string::npos) return;
  const auto name = std::string_view(detail).substr(at + kCodeTag.size(), end - at - kCodeTag.size());
  if (auto code = parse_code_name(name)) fail(*code, detail.substr(end + 2));
}

[[noreturn]] void raise(sqlite3* db, std::string_view what) {
  std::string msg(what);
  if (db != nullptr) {
    const std::string detail = sqlite3_errmsg(db);
    rethrow_tagged(detail);
    msg += ": ";
    msg += detail;
  }
  fail(ErrorCode::StorageFailure, msg);
}

void configure(sqlite3* db) {
  sqlite3_busy_timeout(db, 10000);
  sqlite3_extended_result_codes(db, 1);
}

}  // namespace

Database::Database(const std::filesystem::path& path, Mode mode) {
  const int flags = mode == Mode::ReadOnly
                        ? SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX
                        : SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX;
  sqlite3* db = nullptr;
  if (sqlite3_open_v2(path.c_str(), &db, flags, nullptr) != SQLITE_OK) {
    std::string msg = "cannot open " + path.string();
    if (db != nullptr) {
      msg += ": ";
      msg += sqlite3_errmsg(db);
      sqlite3_close(db);
    }
    fail(ErrorCode::StorageFailure, msg);
  }
  db_ = db;
  configure(db_);
  if (mode == Mode::ReadWriteCreate) {
    exec("PRAGMA journal_mode=WAL");
    exec("PRAGMA synchronous=NORMAL");
  }
}

Database Database::in_memory() {
  sqlite3* db = nullptr;
  if (sqlite3_open_v2(":memory:", &db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_NOMUTEX, nullptr) !=
      SQLITE_OK) {
    sqlite3_close(db);
    fail(ErrorCode::StorageFailure, "cannot open in-memory database");
  }
  configure(db);
  return Database(db);
}

Database::Database(Database&& other) noexcept : db_(std::exchange(other.db_, nullptr)) {}

Database& Database::operator=(Database&& other) noexcept {
  if (this != &other) {
    if (db_ != nullptr) sqlite3_close_v2(db_);
    db_ = std::exchange(other.db_, nullptr);
  }
  return *this;
}

Database::~Database() {
  if (db_ != nullptr) sqlite3_close_v2(db_);
}

void Database::exec(std::string_view sql) {
  std::string text(sql);
  char* err = nullptr;
  if (sqlite3_exec(db_, text.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err != nullptr ? err : "exec failed";
    sqlite3_free(err);
    rethrow_tagged(msg);
    fail(ErrorCode::StorageFailure, msg + " [" + text + "]");
  }
}

Statement Database::prepare(std::string_view sql) { return Statement(db_, sql); }

std::int64_t Database::last_insert_rowid() const { return sqlite3_last_insert_rowid(db_); }

int Database::changes() const { return sqlite3_changes(db_); }

bool Database::table_exists(std::string_view name, std::string_view schema) {
  auto st = prepare("SELECT 1 FROM " + quote_ident(schema) +
                    ".sqlite_master WHERE type='table' AND name = ?1 COLLATE NOCASE");
  st.bind(1, name);
  return st.step();
}

Statement::Statement(sqlite3* db, std::string_view sql) : db_(db) {
  if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) !=
      SQLITE_OK) {
    raise(db, "prepare failed for [" + std::string(sql) + "]");
  }
  if (stmt_ == nullptr) fail(ErrorCode::StorageFailure, "empty statement");
}

Statement::Statement(Statement&& other) noexcept
    : db_(other.db_), stmt_(std::exchange(other.stmt_, nullptr)) {}

Statement& Statement::operator=(Statement&& other) noexcept {
  if (this != &other) {
    if (stmt_ != nullptr) sqlite3_finalize(stmt_);
    db_ = other.db_;
    stmt_ = std::exchange(other.stmt_, nullptr);
  }
  return *this;
}

Statement::~Statement() {
  if (stmt_ != nullptr) sqlite3_finalize(stmt_);
}

Statement& Statement::bind(int index, std::int64_t v) {
  if (sqlite3_bind_int64(stmt_, index, v) != SQLITE_OK) raise(db_, "bind");
  return *this;
}

Statement& Statement::bind(int index, double v) {
  if (sqlite3_bind_double(stmt_, index, v) != SQLITE_OK) raise(db_, "bind");
  return *this;
}

Statement& Statement::bind(int index, std::string_view v) {
  if (sqlite3_bind_text(stmt_, index, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT) !=
      SQLITE_OK) {
    raise(db_, "bind");
  }
  return *this;
}

Statement& Statement::bind_null(int index) {
  if (sqlite3_bind_null(stmt_, index) != SQLITE_OK) raise(db_, "bind");
  return *this;
}

Statement& Statement::bind(int index, const Value& v) {
  struct Visitor {
    Statement& st;
    int index;
    void operator()(Null) { st.bind_null(index); }
    void operator()(std::int64_t i) { st.bind(index, i); }
    void operator()(double d) { st.bind(index, d); }
    void operator()(const std::string& s) { st.bind(index, std::string_view(s)); }
    void operator()(const Date& d) { st.bind(index, d.to_iso()); }
  };
  std::visit(Visitor{*this, index}, v);
  return *this;
}

bool Statement::step() {
  const int rc = sqlite3_step(stmt_);
  if (rc == SQLITE_ROW) return true;
  if (rc == SQLITE_DONE) return false;
  raise(db_, "step failed");
}

void Statement::reset() {
  sqlite3_reset(stmt_);
  sqlite3_clear_bindings(stmt_);
}

void Statement::run() {
  while (step()) {
  }
}

int Statement::column_count() const { return sqlite3_column_count(stmt_); }

std::string Statement::column_name(int i) const {
  const char* n = sqlite3_column_name(stmt_, i);
  return n != nullptr ? n : "";
}

std::string Statement::column_decltype(int i) const {
  const char* t = sqlite3_column_decltype(stmt_, i);
  return t != nullptr ? t : "";
}

bool Statement::column_is_null(int i) const {
  return sqlite3_column_type(stmt_, i) == SQLITE_NULL;
}

std::int64_t Statement::column_int64(int i) const { return sqlite3_column_int64(stmt_, i); }

double Statement::column_double(int i) const { return sqlite3_column_double(stmt_, i); }

std::string Statement::column_text(int i) const {
  const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, i));
  const int n = sqlite3_column_bytes(stmt_, i);
  return p != nullptr ? std::string(p, static_cast<std::size_t>(n)) : std::string();
}

std::optional<std::int64_t> Statement::column_opt_int64(int i) const {
  if (column_is_null(i)) return std::nullopt;
  return column_int64(i);
}

std::optional<std::string> Statement::column_opt_text(int i) const {
  if (column_is_null(i)) return std::nullopt;
  return column_text(i);
}

Value Statement::column_value(int i) const {
  switch (sqlite3_column_type(stmt_, i)) {
    case SQLITE_INTEGER: return column_int64(i);
    case SQLITE_FLOAT: return column_double(i);
    case SQLITE_NULL: return Null{};
    default: return column_text(i);
  }
}

Value Statement::column_value(int i, ColumnType type) const {
  Value raw = column_value(i);
  if (auto v = coerce(raw, type)) return *v;
  return type == ColumnType::String ? Value(format_value(raw)) : raw;
}

Transaction::Transaction(Database& db) : db_(&db) { db_->exec("BEGIN IMMEDIATE"); }

Transaction::~Transaction() {
  if (!done_) {
    try {
      db_->exec("ROLLBACK");
    } catch (...) {
    }
  }
}

void Transaction::commit() {
  db_->exec("COMMIT");
  done_ = true;
}

std::string callback_error_text(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return std::string(kCodeTag) + std::string(code_name(err->code())) + "] " + err->what();
  }
  return e.what();
}

std::string quote_ident(std::string_view name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string_view sql_type(ColumnType type) {
  switch (type) {
    case ColumnType::Integer: return "INTEGER";
    case ColumnType::Float: return "REAL";
    case ColumnType::String: return "TEXT";
    case ColumnType::Date: return "DATE";
  }
  return "TEXT";
}

}  // namespace casq::sqlite

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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "casq/core/value.hpp"

struct sqlite3;
struct sqlite3_stmt;

namespace casq::sqlite {

class Statement;

// Owning handle to one SQLite connection. Errors surface as
// casq::Error(StorageFailure).
class Database {
 public:
  enum class Mode { ReadWriteCreate, ReadOnly };

  Database() = default;
  explicit Database(const std::filesystem::path& path, Mode mode = Mode::ReadWriteCreate);
  static Database in_memory();

  Database(Database&& other) noexcept;
  Database& operator=(Database&& other) noexcept;
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;
  ~Database();

  void exec(std::string_view sql);
  Statement prepare(std::string_view sql);

  std::int64_t last_insert_rowid() const;
  int changes() const;
  bool table_exists(std::string_view name, std::string_view schema = "main");

  sqlite3* handle() const { return db_; }

 private:
  explicit Database(sqlite3* db) : db_(db) {}
  sqlite3* db_ = nullptr;
};

class Statement {
 public:
  Statement(sqlite3* db, std::string_view sql);
  Statement(Statement&& other) noexcept;
  Statement& operator=(Statement&& other) noexcept;
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;
  ~Statement();

  // Parameters are 1-based, as in SQLite.
  Statement& bind(int index, std::int64_t v);
  Statement& bind(int index, int v) { return bind(index, static_cast<std::int64_t>(v)); }
  Statement& bind(int index, double v);
  Statement& bind(int index, std::string_view v);
  Statement& bind(int index, const char* v) { return bind(index, std::string_view(v)); }
  Statement& bind(int index, const std::string& v) { return bind(index, std::string_view(v)); }
  Statement& bind_null(int index);
  Statement& bind(int index, const Value& v);
  template <typename T>
  Statement& bind(int index, const std::optional<T>& v) {
    return v ? bind(index, *v) : bind_null(index);
  }

  // Returns true while a row is available.
  bool step();
  void reset();
  // Runs a statement that returns no rows.
  void run();

  int column_count() const;
  std::string column_name(int i) const;
  // Declared type of a result column, empty for expressions.
  std::string column_decltype(int i) const;
  bool column_is_null(int i) const;
  std::int64_t column_int64(int i) const;
  double column_double(int i) const;
  std::string column_text(int i) const;
  std::optional<std::int64_t> column_opt_int64(int i) const;
  std::optional<std::string> column_opt_text(int i) const;
  // Dynamic value, no schema.
  Value column_value(int i) const;
  // Value converted to the column type.
  Value column_value(int i, ColumnType type) const;

  sqlite3_stmt* handle() const { return stmt_; }

 private:
  sqlite3* db_ = nullptr;
  sqlite3_stmt* stmt_ = nullptr;
};

// BEGIN IMMEDIATE on construction, ROLLBACK on destruction unless committed.
class Transaction {
 public:
  explicit Transaction(Database& db);
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;
  ~Transaction();

  void commit();

 private:
  Database* db_;
  bool done_ = false;
};

// SQL identifier quoting ("name" with embedded quotes doubled).
std::string quote_ident(std::string_view name);

// Message for an exception raised inside a SQLite callback (virtual
// tables, functions). A casq::Error keeps its code: statements failing
// with such a message rethrow it under that code instead of
// StorageFailure.
std::string callback_error_text(const std::exception& e);

// Declared SQL type used when creating a column of the given type.
std::string_view sql_type(ColumnType type);

}  // namespace casq::sqlite

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
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "casq/core/sqlite.hpp"
#include "casq/core/value.hpp"
#include "casq/mydb/mydb.hpp"

namespace casq::loader {

using BatchFn = std::function<void(const Schema&, const std::vector<Row>&)>;

// Where PUBLISH writes. All writes are atomic.
class LoadTarget {
 public:
  virtual ~LoadTarget() = default;
  virtual std::string describe() const = 0;
  virtual std::vector<std::string> tables() = 0;
  virtual std::optional<Schema> schema(const std::string& table) = 0;
  virtual void read(const std::string& table, const BatchFn& fn) = 0;
  virtual void create(const std::string& table, const Schema& schema, const std::vector<Row>& rows) = 0;
  // Returns the rowids of the appended rows.
  virtual std::vector<std::int64_t> append(const std::string& table, const std::vector<Row>& rows) = 0;
  virtual void remove_rows(const std::string& table, const std::vector<std::int64_t>& rowids) = 0;
  virtual void drop(const std::string& table) = 0;
};

// A user's MyDB; quota and accounting apply.
class MyDbLoadTarget : public LoadTarget {
 public:
  MyDbLoadTarget(mydb::MyDbManager& mydb, std::string user) : mydb_(mydb), user_(std::move(user)) {}
  std::string describe() const override { return "MyDB of " + user_; }
  std::vector<std::string> tables() override;
  std::optional<Schema> schema(const std::string& table) override;
  void read(const std::string& table, const BatchFn& fn) override;
  void create(const std::string& table, const Schema& schema, const std::vector<Row>& rows) override;
  std::vector<std::int64_t> append(const std::string& table, const std::vector<Row>& rows) override;
  void remove_rows(const std::string& table, const std::vector<std::int64_t>& rowids) override;
  void drop(const std::string& table) override;

 private:
  mydb::MyDbManager& mydb_;
  std::string user_;
};

// A plain SQLite database, such as the public catalog. Column types come
// from the declared types.
class DatabaseLoadTarget : public LoadTarget {
 public:
  explicit DatabaseLoadTarget(std::filesystem::path path);
  std::string describe() const override { return path_.string(); }
  std::vector<std::string> tables() override;
  std::optional<Schema> schema(const std::string& table) override;
  void read(const std::string& table, const BatchFn& fn) override;
  void create(const std::string& table, const Schema& schema, const std::vector<Row>& rows) override;
  std::vector<std::int64_t> append(const std::string& table, const std::vector<Row>& rows) override;
  void remove_rows(const std::string& table, const std::vector<std::int64_t>& rowids) override;
  void drop(const std::string& table) override;

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  sqlite::Database db_;
};

// Table schema of a SQLite table from its declared column types (unknown
// types read as strings). nullopt when the table does not exist.
std::optional<Schema> sqlite_table_schema(sqlite::Database& db, const std::string& table);
// Reads a table in rowid order.
void sqlite_read_table(sqlite::Database& db, const std::string& table, const Schema& schema, std::size_t batch,
                       const BatchFn& fn);
// Tables of a database that are not internal (sqlite_*, _casq*).
std::vector<std::string> sqlite_user_tables(sqlite::Database& db);

// One entry of a state digest.
struct DigestEntry {
  std::string area;  // "target" or "staging"
  std::string table;
  std::int64_t rows = 0;
  std::string content_hash;

  bool operator==(const DigestEntry&) const = default;
  auto operator<=>(const DigestEntry&) const = default;
};

struct StateDigest {
  std::vector<DigestEntry> entries;  // sorted
  std::string hash() const;
  bool operator==(const StateDigest& o) const { return entries == o.entries; }
};

}  // namespace casq::loader

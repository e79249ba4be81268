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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "casq/core/sqlite.hpp"
#include "casq/core/store.hpp"
#include "casq/core/value.hpp"

namespace casq::mydb {

struct TableInfo {
  std::string name;
  Schema columns;
  std::int64_t row_count = 0;
  std::int64_t byte_size = 0;
  std::int64_t created_at = 0;
  std::set<std::int64_t> published_to;  // group ids
};

struct MyDbInfo {
  std::string user_id;
  std::string physical_name;  // mydb_<user>
  std::int64_t used_bytes = 0;
  std::int64_t quota_bytes = 0;
  std::map<std::string, TableInfo> tables;
};

// Table names are lowercased; they must match [a-z_][a-z0-9_]* and may
// not use the reserved _casq prefix. Throws BadRequest otherwise.
std::string normalize_table_name(std::string_view name);

class MyDbManager;

// Streams rows into a new MyDB table inside one transaction. The user's
// MyDB stays locked for the writer's lifetime. Destroying an uncommitted
// writer rolls everything back.
class TableWriter {
 public:
  TableWriter(TableWriter&&) noexcept;
  TableWriter& operator=(TableWriter&&) = delete;
  ~TableWriter();

  // Column names actually used (duplicates get a _2, _3... suffix).
  const Schema& schema() const { return schema_; }

  // Values are coerced to the column types (TypeMismatch, ArityMismatch).
  // The quota is checked after each batch; on breach the table is rolled
  // back and QuotaExceeded thrown.
  void append(const std::vector<Row>& batch);
  std::int64_t rows() const { return rows_; }
  std::int64_t bytes() const { return bytes_; }

  TableInfo commit();
  void abort();

 private:
  friend class MyDbManager;
  struct State;
  explicit TableWriter(std::unique_ptr<State> s);
  std::unique_ptr<State> s_;
  Schema schema_;
  std::int64_t rows_ = 0;
  std::int64_t bytes_ = 0;
};

// Per-user personal databases, each one SQLite file under the storage
// root. Table metadata lives inside the user's file so data and
// accounting commit together.
class MyDbManager {
 public:
  // Called after a table is dropped (used to revoke publications).
  using DropHook = std::function<void(const std::string& user, const std::string& table)>;

  MyDbManager(Store& store, std::filesystem::path root);

  Store& store() { return store_; }
  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path file_path(std::string_view user) const;

  // Creates the database on first use. UnknownUser for unknown accounts.
  MyDbInfo ensure_mydb(std::string_view user);
  MyDbInfo info(std::string_view user);

  bool table_exists(std::string_view user, std::string_view table);
  std::optional<TableInfo> find_table(std::string_view user, std::string_view table);
  TableInfo get_table(std::string_view user, std::string_view table);  // NoSuchTable

  TableWriter create_table(std::string_view user, std::string_view table, const Schema& schema);
  TableInfo select_into(std::string_view user, std::string_view table, const Schema& schema,
                        const std::vector<Row>& rows);

  // Appends rows to an existing table in one transaction (all or
  // nothing). Values are coerced to the column types. The rowids of the
  // new rows are stored in *rowids when given.
  TableInfo append_rows(std::string_view user, std::string_view table, const std::vector<Row>& rows,
                        std::vector<std::int64_t>* rowids = nullptr);
  // Removes rows by rowid and releases their bytes.
  TableInfo delete_rows(std::string_view user, std::string_view table, const std::vector<std::int64_t>& rowids);

  // Returns the bytes freed.
  std::int64_t drop_table(std::string_view user, std::string_view table);

  // Calls fn with consecutive batches of typed rows, in rowid order.
  void read_table(std::string_view user, std::string_view table, std::size_t batch_rows,
                  const std::function<void(const Schema&, const std::vector<Row>&)>& fn);

  // Table sizes recomputed from the stored rows with the accounting rule.
  std::map<std::string, std::int64_t> recompute_sizes(std::string_view user);

  void set_drop_hook(DropHook hook) { drop_hook_ = std::move(hook); }
  void set_publications_lookup(std::function<std::set<std::int64_t>(const std::string&, const std::string&)> fn) {
    publications_ = std::move(fn);
  }

 private:
  friend class TableWriter;
  std::unique_lock<std::timed_mutex> lock_user(const std::string& user);
  sqlite::Database open(const std::string& user);
  std::map<std::string, TableInfo> load_tables(sqlite::Database& db, const std::string& user);

  Store& store_;
  std::filesystem::path root_;
  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::timed_mutex>> locks_;
  DropHook drop_hook_;
  std::function<std::set<std::int64_t>(const std::string&, const std::string&)> publications_;
};

}  // namespace casq::mydb

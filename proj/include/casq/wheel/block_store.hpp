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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "casq/core/sqlite.hpp"
#include "casq/core/value.hpp"

namespace casq::wheel {

// A table cut into consecutive blocks. read_block counts every call.
class BlockStore {
 public:
  virtual ~BlockStore() = default;
  virtual const std::string& table() const = 0;
  virtual const Schema& schema() const = 0;
  virtual std::size_t block_count() const = 0;

  std::vector<Row> read_block(std::size_t index) {
    ++reads_;
    return load(index);
  }
  std::uint64_t total_reads() const { return reads_.load(); }

 protected:
  virtual std::vector<Row> load(std::size_t index) = 0;

 private:
  std::atomic<std::uint64_t> reads_{0};
};

class MemoryBlockStore : public BlockStore {
 public:
  MemoryBlockStore(std::string table, Schema schema, std::vector<Row> rows, std::size_t block_rows);

  const std::string& table() const override { return table_; }
  const Schema& schema() const override { return schema_; }
  std::size_t block_count() const override { return blocks_; }
  const std::vector<Row>& rows() const { return rows_; }

  // Makes reads of this block throw StorageFailure.
  void fail_block(std::optional<std::size_t> index) { fail_block_ = index; }

 protected:
  std::vector<Row> load(std::size_t index) override;

 private:
  std::string table_;
  Schema schema_;
  std::vector<Row> rows_;
  std::size_t block_rows_;
  std::size_t blocks_;
  std::optional<std::size_t> fail_block_;
};

// Blocks of a table in a SQLite database, cut at rowid boundaries found
// when the store is opened. The table is assumed static while served.
class SqliteBlockStore : public BlockStore {
 public:
  SqliteBlockStore(const std::filesystem::path& db_path, std::string table,
                   std::size_t block_rows);

  const std::string& table() const override { return table_; }
  const Schema& schema() const override { return schema_; }
  std::size_t block_count() const override { return starts_.size(); }

 protected:
  std::vector<Row> load(std::size_t index) override;

 private:
  sqlite::Database db_;
  std::string table_;
  Schema schema_;
  std::vector<std::int64_t> starts_;  // first rowid of each block
};

}  // namespace casq::wheel

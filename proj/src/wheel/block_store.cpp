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

#include "casq/wheel/block_store.hpp"

#include "casq/core/error.hpp"

namespace casq::wheel {

MemoryBlockStore::MemoryBlockStore(std::string table, Schema schema, std::vector<Row> rows,
                                   std::size_t block_rows)
    : table_(std::move(table)),
      schema_(std::move(schema)),
      rows_(std::move(rows)),
      block_rows_(block_rows == 0 ? 1 : block_rows),
      blocks_((rows_.size() + block_rows_ - 1) / block_rows_) {}

std::vector<Row> MemoryBlockStore::load(std::size_t index) {
  if (fail_block_ && *fail_block_ == index) {
    fail(ErrorCode::StorageFailure, "read of block " + std::to_string(index) + " failed");
  }
  const std::size_t begin = index * block_rows_;
  const std::size_t end = std::min(rows_.size(), begin + block_rows_);
  return {rows_.begin() + static_cast<std::ptrdiff_t>(begin), rows_.begin() + static_cast<std::ptrdiff_t>(end)};
}

SqliteBlockStore::SqliteBlockStore(const std::filesystem::path& db_path, std::string table,
                                   std::size_t block_rows)
    : db_(db_path, sqlite::Database::Mode::ReadOnly), table_(std::move(table)) {
  if (block_rows == 0) block_rows = 1;
  auto info = db_.prepare("SELECT name, type FROM pragma_table_info(?1)");
  info.bind(1, table_);
  while (info.step()) {
    schema_.push_back({info.column_text(0), parse_column_type(info.column_text(1)).value_or(ColumnType::String)});
  }
  if (schema_.empty()) fail(ErrorCode::NoSuchTable, "no table " + table_ + " in the catalog");
  auto ids = db_.prepare("SELECT rowid FROM " + sqlite::quote_ident(table_) + " ORDER BY rowid");
  std::size_t n = 0;
  while (ids.step()) {
    if (n % block_rows == 0) starts_.push_back(ids.column_int64(0));
    ++n;
  }
}

std::vector<Row> SqliteBlockStore::load(std::size_t index) {
  std::string sql = "SELECT * FROM " + sqlite::quote_ident(table_) + " WHERE rowid >= ?1";
  if (index + 1 < starts_.size()) sql += " AND rowid < ?2";
  sql += " ORDER BY rowid";
  auto st = db_.prepare(sql);
  st.bind(1, starts_.at(index));
  if (index + 1 < starts_.size()) st.bind(2, starts_[index + 1]);
  std::vector<Row> out;
  while (st.step()) {
    Row row;
    row.reserve(schema_.size());
    for (std::size_t i = 0; i < schema_.size(); ++i) {
      row.push_back(st.column_value(static_cast<int>(i), schema_[i].type));
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace casq::wheel

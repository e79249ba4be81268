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

#include "casq/scheduler/sqlite_backend.hpp"

#include <sqlite3.h>

#include <thread>

#include "casq/core/error.hpp"
#include "casq/sqlrewrite/rewrite.hpp"
#include "casq/wheel/vtab.hpp"

namespace casq::scheduler {

namespace {

constexpr auto kSleepSlice = std::chrono::milliseconds(10);

void sleep_fn(sqlite3_context* ctx, int argc, sqlite3_value** argv) {
  const auto* token = static_cast<const CancelToken*>(sqlite3_user_data(ctx));
  const double seconds = argc > 0 ? sqlite3_value_double(argv[0]) : 0;
  const auto end = std::chrono::steady_clock::now() +
                   std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double>(std::max(0.0, seconds)));
  while (std::chrono::steady_clock::now() < end) {
    if (token->cancelled()) {
      sqlite3_result_error(ctx, "interrupted", -1);
      return;
    }
    std::this_thread::sleep_for(std::min<std::chrono::steady_clock::duration>(
        kSleepSlice, end - std::chrono::steady_clock::now()));
  }
  sqlite3_result_int(ctx, 0);
}

int progress(void* p) { return static_cast<const CancelToken*>(p)->cancelled() ? 1 : 0; }

std::optional<ColumnType> declared_type(const std::string& decl) {
  if (decl.empty()) return std::nullopt;
  return parse_column_type(decl);
}

// Column type from the values seen so far: INTEGER if all integers,
// FLOAT if all numeric, STRING otherwise (including all-null columns).
ColumnType infer(const std::vector<Row>& rows, std::size_t col) {
  bool any_int = false, any_float = false, other = false;
  for (const auto& r : rows) {
    const Value& v = r[col];
    if (std::holds_alternative<std::int64_t>(v)) {
      any_int = true;
    } else if (std::holds_alternative<double>(v)) {
      any_float = true;
    } else if (!is_null(v)) {
      other = true;
    }
  }
  if (other || (!any_int && !any_float)) return ColumnType::String;
  return any_float ? ColumnType::Float : ColumnType::Integer;
}

}  // namespace

SqliteBackend::SqliteBackend(SqliteBackendOptions options) : options_(std::move(options)) {}

std::int64_t SqliteBackend::execute(const ExecutionRequest& request, ResultSink& sink, const CancelToken& token) {
  sqlite::Database db(options_.catalog, sqlite::Database::Mode::ReadOnly);
  for (const auto& user : request.mydb_users) {
    const auto file = options_.mydb_root / (sqlrewrite::physical_database(user) + ".db");
    if (!std::filesystem::exists(file)) {
      fail(ErrorCode::NoSuchTable, "MyDB of " + user + " does not exist yet");
    }
    auto st = db.prepare("ATTACH DATABASE ?1 AS " + sqlite::quote_ident(sqlrewrite::physical_database(user)));
    st.bind(1, file.string()).run();
  }
  sqlite3_create_function_v2(db.handle(), "sleep", 1, SQLITE_UTF8, const_cast<CancelToken*>(&token), sleep_fn,
                             nullptr, nullptr, nullptr);
  sqlite3_progress_handler(db.handle(), 1000, progress, const_cast<CancelToken*>(&token));

  std::string query = request.physical_query;
  if (request.wheel_table && options_.wheels != nullptr) {
    wheel::register_wheel_module(db, *options_.wheels, [&token] { return token.cancelled(); });
    const std::string vtab = wheel::create_wheel_vtab(db, *request.wheel_table);
    query = sqlrewrite::retarget_table(query, *request.wheel_table, vtab);
  }

  auto st = db.prepare(query);
  const int ncol = st.column_count();
  if (ncol == 0) fail(ErrorCode::QueryRejected, "statement returns no columns");
  Schema schema(static_cast<std::size_t>(ncol));
  std::vector<bool> known(schema.size(), false);
  for (int i = 0; i < ncol; ++i) {
    schema[i].name = st.column_name(i);
    if (auto t = declared_type(st.column_decltype(i))) {
      schema[i].type = *t;
      known[i] = true;
    }
  }

  std::int64_t total = 0;
  bool schema_sent = false;
  std::vector<Row> batch;
  batch.reserve(options_.batch_rows);
  auto flush = [&] {
    if (token.cancelled()) return;
    if (!schema_sent) {
      for (std::size_t i = 0; i < schema.size(); ++i) {
        if (!known[i]) schema[i].type = infer(batch, i);
      }
      sink.on_schema(schema);
      schema_sent = true;
    }
    if (batch.empty()) return;
    for (auto& row : batch) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        auto v = coerce(row[i], schema[i].type);
        if (!v) {
          fail(ErrorCode::TypeMismatch, "column " + schema[i].name + " mixes " +
                                            std::string(column_type_name(schema[i].type)) + " with '" +
                                            format_value(row[i]) + "'");
        }
        row[i] = std::move(*v);
      }
    }
    sink.on_batch(batch);
    total += static_cast<std::int64_t>(batch.size());
    batch.clear();
  };

  while (!token.cancelled() && st.step()) {
    Row row;
    row.reserve(schema.size());
    for (int i = 0; i < ncol; ++i) {
      row.push_back(known[i] ? st.column_value(i, schema[i].type) : st.column_value(i));
    }
    batch.push_back(std::move(row));
    if (batch.size() >= options_.batch_rows) flush();
  }
  flush();
  return total;
}

}  // namespace casq::scheduler

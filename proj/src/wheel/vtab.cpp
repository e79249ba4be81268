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

#include "casq/wheel/vtab.hpp"

#include <sqlite3.h>

#include <cstring>
#include <memory>

#include "casq/core/error.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::wheel {

namespace {

struct ModuleContext {
  WheelRegistry* registry;
  std::function<bool()> cancelled;
};

struct VTab {
  sqlite3_vtab base{};
  ModuleContext* ctx = nullptr;
  SharedScan* scan = nullptr;
};

struct Cursor {
  sqlite3_vtab_cursor base{};
  std::shared_ptr<QueueRider> rider;
  std::optional<SessionId> session;
  std::vector<Row> block;
  std::size_t pos = 0;
  sqlite3_int64 rowid = 0;
  bool eof = true;
};

void set_error(sqlite3_vtab* vt, const std::string& msg) {
  sqlite3_free(vt->zErrMsg);
  vt->zErrMsg = sqlite3_mprintf("%s", msg.c_str());
}

std::string strip_quotes(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

int x_connect(sqlite3* db, void* aux, int argc, const char* const* argv, sqlite3_vtab** out, char** err) {
  auto* ctx = static_cast<ModuleContext*>(aux);
  if (argc < 4) {
    *err = sqlite3_mprintf("casq_wheel needs a table argument");
    return SQLITE_ERROR;
  }
  try {
    SharedScan& scan = ctx->registry->get(strip_quotes(argv[3]));
    std::string ddl = "CREATE TABLE x(";
    const Schema& schema = scan.schema();
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (i > 0) ddl += ", ";
      ddl += sqlite::quote_ident(schema[i].name) + " " + std::string(sqlite::sql_type(schema[i].type));
    }
    ddl += ")";
    if (int rc = sqlite3_declare_vtab(db, ddl.c_str()); rc != SQLITE_OK) return rc;
    auto vt = std::make_unique<VTab>();
    vt->ctx = ctx;
    vt->scan = &scan;
    *out = &vt.release()->base;
    return SQLITE_OK;
  } catch (const std::exception& e) {
    *err = sqlite3_mprintf("%s", sqlite::callback_error_text(e).c_str());
    return SQLITE_ERROR;
  }
}

int x_disconnect(sqlite3_vtab* vt) {
  delete reinterpret_cast<VTab*>(vt);
  return SQLITE_OK;
}

int x_best_index(sqlite3_vtab*, sqlite3_index_info* info) {
  // Always a full revolution; SQLite applies the predicates.
  info->estimatedCost = 1e12;
  info->estimatedRows = 1000000000;
  return SQLITE_OK;
}

int x_open(sqlite3_vtab*, sqlite3_vtab_cursor** out) {
  auto* c = new Cursor();
  *out = &c->base;
  return SQLITE_OK;
}

void stop_ride(VTab* vt, Cursor* c) {
  if (c->session) {
    vt->scan->detach(*c->session);
    c->session.reset();
  }
  if (c->rider) c->rider->close();
  c->rider.reset();
}

int x_close(sqlite3_vtab_cursor* cur) {
  auto* c = reinterpret_cast<Cursor*>(cur);
  auto* vt = reinterpret_cast<VTab*>(cur->pVtab);
  if (c->rider && !c->rider->finished()) stop_ride(vt, c);
  delete c;
  return SQLITE_OK;
}

// Moves to the next row, pulling blocks as needed.
int fill(Cursor* c, VTab* vt) {
  while (c->pos >= c->block.size()) {
    std::optional<std::vector<Row>> next;
    try {
      next = c->rider->next(vt->ctx->cancelled);
    } catch (const std::exception& e) {
      set_error(&vt->base, sqlite::callback_error_text(e));
      return SQLITE_ERROR;
    }
    if (!next) {
      if (vt->ctx->cancelled && vt->ctx->cancelled()) {
        stop_ride(vt, c);
        return SQLITE_INTERRUPT;
      }
      c->eof = true;
      c->block.clear();
      c->pos = 0;
      return SQLITE_OK;
    }
    c->block = std::move(*next);
    c->pos = 0;
  }
  c->eof = false;
  return SQLITE_OK;
}

int x_filter(sqlite3_vtab_cursor* cur, int, const char*, int, sqlite3_value**) {
  auto* c = reinterpret_cast<Cursor*>(cur);
  auto* vt = reinterpret_cast<VTab*>(cur->pVtab);
  stop_ride(vt, c);
  c->block.clear();
  c->pos = 0;
  c->rowid = 0;
  c->rider = std::make_shared<QueueRider>();
  try {
    c->session = vt->scan->attach(vt->scan->table(), c->rider);
  } catch (const std::exception& e) {
    set_error(&vt->base, sqlite::callback_error_text(e));
    return SQLITE_ERROR;
  }
  return fill(c, vt);
}

int x_next(sqlite3_vtab_cursor* cur) {
  auto* c = reinterpret_cast<Cursor*>(cur);
  ++c->pos;
  ++c->rowid;
  return fill(c, reinterpret_cast<VTab*>(cur->pVtab));
}

int x_eof(sqlite3_vtab_cursor* cur) { return reinterpret_cast<Cursor*>(cur)->eof ? 1 : 0; }

int x_column(sqlite3_vtab_cursor* cur, sqlite3_context* ctx, int i) {
  auto* c = reinterpret_cast<Cursor*>(cur);
  const Value& v = c->block[c->pos].at(static_cast<std::size_t>(i));
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Null>) {
          sqlite3_result_null(ctx);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          sqlite3_result_int64(ctx, x);
        } else if constexpr (std::is_same_v<T, double>) {
          sqlite3_result_double(ctx, x);
        } else if constexpr (std::is_same_v<T, std::string>) {
          sqlite3_result_text(ctx, x.data(), static_cast<int>(x.size()), SQLITE_TRANSIENT);
        } else {
          const std::string s = x.to_iso();
          sqlite3_result_text(ctx, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
        }
      },
      v);
  return SQLITE_OK;
}

int x_rowid(sqlite3_vtab_cursor* cur, sqlite3_int64* out) {
  *out = reinterpret_cast<Cursor*>(cur)->rowid;
  return SQLITE_OK;
}

const sqlite3_module kModule = {
    /* iVersion */ 0,
    /* xCreate */ x_connect,
    /* xConnect */ x_connect,
    /* xBestIndex */ x_best_index,
    /* xDisconnect */ x_disconnect,
    /* xDestroy */ x_disconnect,
    /* xOpen */ x_open,
    /* xClose */ x_close,
    /* xFilter */ x_filter,
    /* xNext */ x_next,
    /* xEof */ x_eof,
    /* xColumn */ x_column,
    /* xRowid */ x_rowid,
    /* xUpdate */ nullptr,
    /* xBegin */ nullptr,
    /* xSync */ nullptr,
    /* xCommit */ nullptr,
    /* xRollback */ nullptr,
    /* xFindFunction */ nullptr,
    /* xRename */ nullptr,
    /* xSavepoint */ nullptr,
    /* xRelease */ nullptr,
    /* xRollbackTo */ nullptr,
    /* xShadowName */ nullptr,
};

}  // namespace

void register_wheel_module(sqlite::Database& db, WheelRegistry& registry, std::function<bool()> cancelled) {
  auto* ctx = new ModuleContext{&registry, std::move(cancelled)};
  const int rc = sqlite3_create_module_v2(db.handle(), "casq_wheel", &kModule, ctx,
                                          [](void* p) { delete static_cast<ModuleContext*>(p); });
  if (rc != SQLITE_OK) fail(ErrorCode::StorageFailure, "cannot register the wheel module");
}

std::string create_wheel_vtab(sqlite::Database& db, std::string_view table) {
  const std::string lower = sqlrewrite::to_lower(table);
  std::string name = "casq_wheel_";
  for (char ch : lower) name += (ch == '.' ? '_' : ch);
  db.exec("CREATE VIRTUAL TABLE IF NOT EXISTS temp." + sqlite::quote_ident(name) + " USING casq_wheel(" +
          sqlite::quote_ident(lower) + ")");
  return "temp." + name;
}

}  // namespace casq::wheel

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

#include "casq/service/config.hpp"

#include <fstream>
#include <sstream>

#include "casq/core/error.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const json* at(const json& j, std::initializer_list<const char*> keys) {
  const json* cur = &j;
  for (const char* k : keys) {
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(k);
    if (it == cur->end()) return nullptr;
    cur = &*it;
  }
  return cur;
}

template <typename T>
void read(const json& j, std::initializer_list<const char*> keys, T& out) {
  if (const json* v = at(j, keys); v != nullptr && !v->is_null()) {
    try {
      out = v->get<T>();
    } catch (const json::exception& e) {
      std::string path;
      for (const char* k : keys) path += (path.empty() ? "" : ".") + std::string(k);
      fail(ErrorCode::BadRequest, "config key " + path + ": " + e.what());
    }
  }
}

void read_path(const json& j, std::initializer_list<const char*> keys, fs::path& out) {
  std::string s;
  read(j, keys, s);
  if (!s.empty()) out = s;
}

}  // namespace

Config Config::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) fail(ErrorCode::BadRequest, "config must be a JSON object");
  Config c;
  c.data_dir = base_dir;
  read(j, {"node", "id"}, c.node_id);
  read(j, {"node", "key_seed"}, c.key_seed_hex);
  read(j, {"listen", "host"}, c.listen_host);
  read(j, {"listen", "port"}, c.listen_port);
  read(j, {"listen", "public_url"}, c.public_url);
  read_path(j, {"data_dir"}, c.data_dir);
  if (c.data_dir.is_relative()) c.data_dir = base_dir / c.data_dir;
  read_path(j, {"store", "path"}, c.store_path);
  read_path(j, {"catalog", "path"}, c.catalog_path);
  read_path(j, {"mydb", "root"}, c.mydb_root);
  read_path(j, {"files", "dir"}, c.files_dir);
  read_path(j, {"loader", "dir"}, c.loader_dir);
  read_path(j, {"ui", "dir"}, c.ui_dir);
  read(j, {"ui", "poll_interval_ms"}, c.ui_poll_interval_ms);

  if (const json* idx = at(j, {"catalog", "indexed"}); idx != nullptr) {
    if (!idx->is_object()) fail(ErrorCode::BadRequest, "catalog.indexed must map tables to column lists");
    for (const auto& [table, cols] : idx->items()) {
      auto& set = c.indexed[sqlrewrite::to_lower(table)];
      for (const auto& col : cols) set.insert(sqlrewrite::to_lower(col.get<std::string>()));
    }
  }

  if (const json* qs = at(j, {"queues"}); qs != nullptr) {
    if (!qs->is_array()) fail(ErrorCode::BadRequest, "queues must be an array");
    c.queues.clear();
    for (const auto& q : *qs) {
      QueueSpec s;
      read(q, {"name"}, s.name);
      read(q, {"time_limit_s"}, s.time_limit_s);
      read(q, {"max_concurrency"}, s.max_concurrency);
      std::string next;
      read(q, {"next_queue"}, next);
      if (!next.empty()) s.next_queue = next;
      read(q, {"requires_mydb_target"}, s.requires_mydb_target);
      c.queues.push_back(std::move(s));
    }
    QueueSet check(c.queues);  // validates
  }

  read(j, {"quota", "default_bytes"}, c.default_quota_bytes);
  if (c.default_quota_bytes < 0) fail(ErrorCode::BadRequest, "quota.default_bytes must be >= 0");

  read(j, {"wheel", "enabled"}, c.wheel_enabled);
  read(j, {"wheel", "block_rows"}, c.wheel_block_rows);
  if (c.wheel_block_rows == 0) fail(ErrorCode::BadRequest, "wheel.block_rows must be >= 1");
  if (const json* ep = at(j, {"wheel", "entry_points"}); ep != nullptr && !ep->is_null()) {
    c.wheel_entry_points = ep->get<std::size_t>();
  }

  if (const json* t = at(j, {"trust"}); t != nullptr) {
    for (const auto& e : *t) {
      TrustEntry te;
      read(e, {"node"}, te.node);
      read(e, {"key"}, te.public_key_hex);
      if (te.node.empty() || te.public_key_hex.empty()) fail(ErrorCode::BadRequest, "trust entries need node and key");
      c.trust.push_back(std::move(te));
    }
  }
  if (const json* p = at(j, {"peers"}); p != nullptr) {
    for (const auto& e : *p) {
      PeerEntry pe;
      read(e, {"name"}, pe.name);
      read(e, {"url"}, pe.url);
      if (pe.name.empty() || pe.url.empty()) fail(ErrorCode::BadRequest, "peer entries need name and url");
      c.peers.push_back(std::move(pe));
    }
  }

  read(j, {"files", "ttl_days"}, c.files_ttl_days);
  read(j, {"extract", "workers"}, c.extract_workers);
  read(j, {"loader", "width"}, c.loader_width);
  read(j, {"token_ttl_s"}, c.token_ttl_s);
  if (c.extract_workers == 0 || c.loader_width == 0) fail(ErrorCode::BadRequest, "worker counts must be >= 1");

  if (const json* us = at(j, {"users"}); us != nullptr) {
    for (const auto& u : *us) {
      UserSeed s;
      read(u, {"id"}, s.id);
      std::string pw;
      read(u, {"password"}, pw);
      if (!pw.empty()) s.password = pw;
      if (const json* q = at(u, {"quota_bytes"}); q != nullptr) s.quota_bytes = q->get<std::int64_t>();
      c.users.push_back(std::move(s));
    }
  }
  return c;
}

Config Config::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::NotFound, "cannot read config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    fail(ErrorCode::BadRequest, "config " + file.string() + ": " + e.what());
  }
  fs::path base = fs::absolute(file).parent_path();
  return from_json(j, base);
}

fs::path Config::resolve(const fs::path& p) const {
  return p.is_absolute() ? p : data_dir / p;
}

std::string Config::self_url() const {
  if (!public_url.empty()) return public_url;
  return "http://" + listen_host + ":" + std::to_string(listen_port);
}

}  // namespace casq::service

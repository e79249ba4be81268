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
#include <vector>

#include <json.hpp>

#include "casq/core/queue.hpp"
#include "casq/sqlrewrite/classify.hpp"

namespace casq::service {

struct UserSeed {
  std::string id;
  std::optional<std::string> password;
  std::optional<std::int64_t> quota_bytes;
};

struct TrustEntry {
  std::string node;
  std::string public_key_hex;
};

struct PeerEntry {
  std::string name;
  std::string url;
};

// Server configuration. Relative paths are resolved against the
// directory of the config file (or `data_dir` when built in code).
struct Config {
  std::string node_id = "local";
  std::string key_seed_hex;  // empty: generated once and kept in <data_dir>/node.key
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::string public_url;  // how peers and the UI reach this node; defaults to http://host:port

  std::filesystem::path data_dir = ".";
  std::filesystem::path store_path = "casq.db";
  std::filesystem::path catalog_path = "catalog.db";
  std::filesystem::path mydb_root = "mydb";
  std::filesystem::path files_dir = "files";
  std::filesystem::path loader_dir = "loader";
  std::filesystem::path ui_dir;  // empty: /ui serves nothing

  sqlrewrite::IndexCatalog indexed;
  std::vector<QueueSpec> queues = QueueSet::defaults().all();
  std::int64_t default_quota_bytes = 100LL * 1024 * 1024;

  bool wheel_enabled = true;
  std::size_t wheel_block_rows = 4096;
  std::optional<std::size_t> wheel_entry_points;

  std::vector<TrustEntry> trust;
  std::vector<PeerEntry> peers;

  int files_ttl_days = 7;
  std::size_t extract_workers = 2;
  std::size_t loader_width = 2;
  std::int64_t token_ttl_s = 8 * 3600;
  int ui_poll_interval_ms = 5000;

  std::vector<UserSeed> users;

  // BadRequest on unknown types or invalid values. Paths in `j` are
  // taken relative to base_dir.
  static Config from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static Config load(const std::filesystem::path& file);

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::string self_url() const;
};

}  // namespace casq::service

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

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "casq/core/store.hpp"
#include "casq/exchange/extraction.hpp"
#include "casq/exchange/file_store.hpp"
#include "casq/federation/node.hpp"
#include "casq/federation/token.hpp"
#include "casq/loader/engine.hpp"
#include "casq/mydb/groups.hpp"
#include "casq/mydb/mydb.hpp"
#include "casq/scheduler/scheduler.hpp"
#include "casq/scheduler/sqlite_backend.hpp"
#include "casq/service/config.hpp"
#include "casq/wheel/shared_scan.hpp"

namespace casq::service {

// Result of an API operation: an HTTP status plus the envelope payload.
struct ApiResult {
  int status = 200;
  nlohmann::json result;
};

// Query parameters of GET /jobs.
struct JobQuery {
  std::optional<std::string> state;
  std::optional<std::string> queue;
  std::optional<std::int64_t> from;
  std::optional<std::int64_t> to;
};

// Rows kept for short RETURN_ROWS jobs so the submit response can carry
// them; the full result always goes to a CSV file as well.
inline constexpr std::size_t kInlineRowLimit = 1000;

class InlineResults {
 public:
  struct Entry {
    Schema schema;
    std::vector<Row> rows;
    bool truncated = false;
  };
  void put(JobId id, Entry e);
  std::optional<Entry> take(JobId id);

 private:
  std::mutex mu_;
  std::map<JobId, Entry> entries_;
};

// Every module wired together. Operations take the authenticated user id
// and a JSON body and return the envelope result, throwing casq::Error on
// failure; the HTTP layer only translates.
class Service {
 public:
  explicit Service(Config config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Restart recovery, then worker start. Jobs left STARTED become FAILED;
  // SUBMITTED jobs are queued again in id order.
  void start();
  // Stops workers; queued jobs stay SUBMITTED for the next start.
  void stop();

  const Config& config() const { return config_; }
  Store& store() { return store_; }
  mydb::MyDbManager& mydb() { return mydb_; }
  mydb::Groups& groups() { return groups_; }
  exchange::FileStore& files() { return files_; }
  scheduler::Scheduler& scheduler() { return *scheduler_; }
  exchange::ExtractionProcessor& extraction() { return *extraction_; }
  loader::LoaderEngine& loader() { return *loader_; }
  federation::NodeIdentity& identity() { return identity_; }
  wheel::WheelRegistry* wheels() { return wheels_.get(); }

  // "Bearer <token>" -> local user id. Unauthenticated when absent.
  std::string authenticate(std::string_view authorization_header);
  std::string issue_token(const std::string& user);

  ApiResult login(const nlohmann::json& body);
  ApiResult identity_info();

  ApiResult submit_job(const std::string& user, const nlohmann::json& body);
  ApiResult job_status(const std::string& user, JobId id);
  ApiResult list_jobs(const std::string& user, const JobQuery& q);
  ApiResult resubmit_job(const std::string& user, JobId id);
  ApiResult cancel_job(const std::string& user, JobId id);

  ApiResult list_tables(const std::string& user);
  ApiResult create_table(const std::string& user, const nlohmann::json& body);
  ApiResult drop_table(const std::string& user, const std::string& table);
  ApiResult upload_rows(const std::string& user, const std::string& table, std::string_view csv);
  ApiResult export_table(const std::string& user, const nlohmann::json& body);
  exchange::FileArtifact file_for(const std::string& user, const std::string& digest);

  ApiResult create_group(const std::string& user, const nlohmann::json& body);
  ApiResult list_groups(const std::string& user);
  ApiResult invite(const std::string& user, std::int64_t group_id, const nlohmann::json& body);
  ApiResult accept(const std::string& user, std::int64_t group_id);
  ApiResult publish(const std::string& user, std::int64_t group_id, const nlohmann::json& body);

  ApiResult federation_space(const std::string& user);
  federation::TableDump federation_table(const std::string& user, const std::string& owner, const std::string& table);
  ApiResult federation_fetch(const std::string& user, const std::string& bearer, const nlohmann::json& body);
  ApiResult federation_spaces(const std::string& user, const std::string& bearer);

  // Synthetic workload sample and its power-law fit.
  ApiResult simulate(const nlohmann::json& body);

  ApiResult wheel_stats();
  ApiResult queues();
  ApiResult ui_config();

  ApiResult start_load(const std::string& user, const nlohmann::json& body);
  ApiResult load_runs(const std::string& user);
  ApiResult load_run(const std::string& user, loader::RunId id);
  ApiResult cancel_load(const std::string& user, loader::RunId id);

 private:
  class Environment;

  JobRecord owned_job(const std::string& user, JobId id);
  loader::RunReport owned_run(const std::string& user, loader::RunId id);
  void seed_users();

  Config config_;
  Store store_;
  mydb::MyDbManager mydb_;
  mydb::Groups groups_;
  mydb::MyDbCatalog catalog_;
  exchange::FileStore files_;
  std::unique_ptr<wheel::WheelRegistry> wheels_;
  std::unique_ptr<scheduler::SqliteBackend> backend_;
  InlineResults inline_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<scheduler::Scheduler> scheduler_;
  std::unique_ptr<exchange::ExtractionProcessor> extraction_;
  std::unique_ptr<loader::LoaderEngine> loader_;
  federation::NodeIdentity identity_;
  std::atomic<std::uint64_t> upload_seq_{0};
  bool started_ = false;
};

}  // namespace casq::service

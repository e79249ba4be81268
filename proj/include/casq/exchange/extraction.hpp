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
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "casq/core/store.hpp"
#include "casq/exchange/file_sink.hpp"
#include "casq/exchange/file_store.hpp"
#include "casq/mydb/groups.hpp"
#include "casq/mydb/mydb.hpp"
#include "casq/sqlrewrite/classify.hpp"

namespace casq::exchange {

struct ExportRequest {
  std::string user_id;
  std::string table;  // "MyDB.t", "GROUP.owner.t", or a bare name for MyDB.t
  std::string format;
};

// The owner and table an export of `table_text` reads for `user`.
// Bare names mean the user's own MyDB. Public catalog tables are not
// exportable (BadRequest).
sqlrewrite::TableRef resolve_export_table(std::string_view user, std::string_view table_text);

// Runs table exports as jobs in the extraction queue, on its own worker
// pool. Workers are named "extract#<i>" and never serve query queues.
class ExtractionProcessor {
 public:
  ExtractionProcessor(Store& store, mydb::MyDbManager& mydb, mydb::Groups& groups, FileStore& files,
                      std::size_t workers = 2, std::size_t batch_rows = 1024);
  ~ExtractionProcessor();
  ExtractionProcessor(const ExtractionProcessor&) = delete;
  ExtractionProcessor& operator=(const ExtractionProcessor&) = delete;

  // Validates format and access, records the job, and queues it.
  // UnsupportedFormat, AccessDenied, NoSuchTable, MalformedPseudoName.
  JobRecord enqueue_export(const ExportRequest& req);

  // Queues an already recorded SUBMITTED extraction job (restart recovery).
  void submit(JobId id);
  // Withdraws a queued job or stops a running one between batches.
  bool cancel(JobId id);

  std::optional<JobRecord> wait(JobId id, std::chrono::milliseconds timeout);
  void wait_idle();
  void stop();

  void set_on_finished(std::function<void(const JobRecord&)> fn);

 private:
  void worker_loop(std::size_t index);
  void run(JobId id, const std::string& worker);

  Store& store_;
  mydb::MyDbManager& mydb_;
  mydb::Groups& groups_;
  FileStore& files_;
  std::size_t batch_rows_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::deque<JobId> queue_;
  std::set<JobId> running_;
  std::set<JobId> cancel_requests_;
  bool stopping_ = false;
  std::function<void(const JobRecord&)> on_finished_;
  std::vector<std::thread> threads_;
};

}  // namespace casq::exchange

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

#include "casq/core/job.hpp"
#include "casq/core/queue.hpp"
#include "casq/core/sqlite.hpp"

namespace casq {

inline constexpr std::int64_t kDefaultQuotaBytes = 100LL * 1024 * 1024;

struct UserAccount {
  std::string user_id;
  std::int64_t quota_bytes = kDefaultQuotaBytes;
  bool mydb_created = false;
};

struct JobFilter {
  std::optional<JobState> state;
  std::optional<std::string> queue;
  std::optional<std::int64_t> submitted_from;  // inclusive
  std::optional<std::int64_t> submitted_to;    // inclusive
};

struct NewJob {
  std::string user_id;
  std::string query_text;
  std::string queue;
  JobTarget target;
  bool autocomplete = false;
  std::string fingerprint;
  std::optional<JobId> parent_job;
  int promotion_count = 0;
};

struct TransitionUpdate {
  std::optional<std::string> error;
  std::optional<std::int64_t> rows_produced;
  std::optional<std::string> output_url;
  std::optional<std::string> worker;
};

// User ids are lowercase identifiers: [a-z0-9_]+ after lowercasing.
// Returns the normalized id or throws BadRequest.
std::string normalize_user_id(std::string_view id);

// The administrative database: accounts, the Jobs table, and the group
// tables used by the mydb module. One connection guarded by a mutex, so
// every operation is linearizable; state changes are check-and-set.
class Store {
 public:
  Store(const std::filesystem::path& path, QueueSet queues,
        std::int64_t default_quota_bytes = kDefaultQuotaBytes);

  const QueueSet& queues() const { return queues_; }
  std::int64_t default_quota_bytes() const { return default_quota_; }

  // Accounts.
  UserAccount create_user(std::string_view user_id,
                          std::optional<std::string_view> password = std::nullopt,
                          std::optional<std::int64_t> quota_bytes = std::nullopt);
  // Creates the account if missing (federated principals). Returns it.
  UserAccount ensure_user(std::string_view user_id);
  std::optional<UserAccount> find_user(std::string_view user_id);
  UserAccount get_user(std::string_view user_id);  // UnknownUser
  bool verify_password(std::string_view user_id, std::string_view password);
  void set_mydb_created(std::string_view user_id);
  void set_quota(std::string_view user_id, std::int64_t quota_bytes);

  // Jobs.
  JobRecord create_job(const NewJob& job);
  JobRecord transition(JobId id, JobState to, const TransitionUpdate& update = {});
  JobRecord get_job(JobId id);  // UnknownJob
  std::vector<JobRecord> list_jobs(std::string_view user_id, const JobFilter& filter = {});
  // Clone of a terminal job, parented to it.
  JobRecord resubmit(JobId id);
  // Jobs in SUBMITTED/STARTED state across all users, ascending job_id.
  std::vector<JobRecord> active_jobs();
  // Wall-clock durations (seconds) of SUCCEEDED jobs with this fingerprint.
  std::vector<double> succeeded_durations(std::string_view fingerprint);
  // STARTED jobs become FAILED("orphaned by restart"). Returns their ids.
  std::vector<JobId> recover_orphans();

  // Direct access for modules that keep tables in the admin database.
  template <typename Fn>
  auto with_db(Fn&& fn) {
    std::lock_guard lock(mu_);
    return fn(db_);
  }

 private:
  JobRecord load_job_locked(JobId id);
  void migrate();

  std::mutex mu_;
  sqlite::Database db_;
  QueueSet queues_;
  std::int64_t default_quota_;
  std::int64_t last_stamp_ = 0;
};

}  // namespace casq

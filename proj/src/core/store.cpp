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

#include "casq/core/store.hpp"

#include <sodium.h>

#include <algorithm>
#include <cctype>

#include "casq/core/digest.hpp"
#include "casq/core/error.hpp"
#include "casq/core/value.hpp"

namespace casq {

namespace {

constexpr const char* kJobColumns =
    "job_id, user_id, queue, query_text, state, target_kind, target_table, target_format, "
    "submitted_at, started_at, finished_at, rows_produced, output_url, error, parent_job, "
    "promotion_count, autocomplete, fingerprint, worker";

JobRecord read_job(const sqlite::Statement& st) {
  JobRecord r;
  r.job_id = st.column_int64(0);
  r.user_id = st.column_text(1);
  r.queue = st.column_text(2);
  r.query_text = st.column_text(3);
  r.state = parse_state(st.column_text(4)).value_or(JobState::Failed);
  r.target.kind = parse_target_kind(st.column_text(5)).value_or(TargetKind::ReturnRows);
  r.target.table = st.column_text(6);
  r.target.format = st.column_text(7);
  r.submitted_at = st.column_int64(8);
  r.started_at = st.column_opt_int64(9);
  r.finished_at = st.column_opt_int64(10);
  r.rows_produced = st.column_int64(11);
  r.output_url = st.column_opt_text(12);
  r.error = st.column_opt_text(13);
  r.parent_job = st.column_opt_int64(14);
  r.promotion_count = static_cast<int>(st.column_int64(15));
  r.autocomplete = st.column_int64(16) != 0;
  r.fingerprint = st.column_text(17);
  r.worker = st.column_text(18);
  return r;
}

void assert_record(const JobRecord& r) {
  if (auto violation = check_record(r)) {
    fail(ErrorCode::StorageFailure,
         "job " + std::to_string(r.job_id) + " violates record invariant: " + *violation);
  }
}

}  // namespace

std::string normalize_user_id(std::string_view id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    const auto uc = static_cast<unsigned char>(c);
    if (!std::isalnum(uc) && c != '_') {
      fail(ErrorCode::BadRequest, "invalid user id '" + std::string(id) + "'");
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  if (out.empty()) fail(ErrorCode::BadRequest, "empty user id");
  return out;
}

Store::Store(const std::filesystem::path& path, QueueSet queues, std::int64_t default_quota_bytes)
    : db_(path), queues_(std::move(queues)), default_quota_(default_quota_bytes) {
  if (default_quota_ <= 0) fail(ErrorCode::BadRequest, "default quota must be positive");
  migrate();
}

void Store::migrate() {
  db_.exec(R"sql(
    CREATE TABLE IF NOT EXISTS users (
      user_id TEXT PRIMARY KEY,
      quota_bytes INTEGER NOT NULL CHECK (quota_bytes > 0),
      mydb_created INTEGER NOT NULL DEFAULT 0,
      password_hash TEXT
    );
    CREATE TABLE IF NOT EXISTS jobs (
      job_id INTEGER PRIMARY KEY AUTOINCREMENT,
      user_id TEXT NOT NULL REFERENCES users(user_id),
      queue TEXT NOT NULL,
      query_text TEXT NOT NULL,
      state TEXT NOT NULL,
      target_kind TEXT NOT NULL,
      target_table TEXT NOT NULL DEFAULT '',
      target_format TEXT NOT NULL DEFAULT '',
      submitted_at INTEGER NOT NULL,
      started_at INTEGER,
      finished_at INTEGER,
      rows_produced INTEGER NOT NULL DEFAULT 0,
      output_url TEXT,
      error TEXT,
      parent_job INTEGER,
      promotion_count INTEGER NOT NULL DEFAULT 0,
      autocomplete INTEGER NOT NULL DEFAULT 0,
      fingerprint TEXT NOT NULL DEFAULT '',
      worker TEXT NOT NULL DEFAULT ''
    );
    CREATE INDEX IF NOT EXISTS jobs_by_user ON jobs(user_id, job_id);
    CREATE INDEX IF NOT EXISTS jobs_by_fingerprint ON jobs(fingerprint, state);
    CREATE TABLE IF NOT EXISTS groups (
      group_id INTEGER PRIMARY KEY AUTOINCREMENT,
      name TEXT NOT NULL UNIQUE,
      owner TEXT NOT NULL REFERENCES users(user_id)
    );
    CREATE TABLE IF NOT EXISTS group_members (
      group_id INTEGER NOT NULL REFERENCES groups(group_id),
      user_id TEXT NOT NULL REFERENCES users(user_id),
      status TEXT NOT NULL CHECK (status IN ('INVITED', 'ACCEPTED')),
      PRIMARY KEY (group_id, user_id)
    );
    CREATE TABLE IF NOT EXISTS publications (
      owner TEXT NOT NULL,
      table_name TEXT NOT NULL,
      group_id INTEGER NOT NULL REFERENCES groups(group_id),
      PRIMARY KEY (owner, table_name, group_id)
    );
  )sql");
}

UserAccount Store::create_user(std::string_view user_id, std::optional<std::string_view> password,
                               std::optional<std::int64_t> quota_bytes) {
  const std::string id = normalize_user_id(user_id);
  const std::int64_t quota = quota_bytes.value_or(default_quota_);
  if (quota <= 0) fail(ErrorCode::BadRequest, "quota must be positive");
  std::optional<std::string> hash;
  if (password) {
    init_crypto();
    char buf[crypto_pwhash_STRBYTES];
    if (crypto_pwhash_str(buf, password->data(), password->size(),
                          crypto_pwhash_OPSLIMIT_INTERACTIVE,
                          crypto_pwhash_MEMLIMIT_INTERACTIVE) != 0) {
      fail(ErrorCode::StorageFailure, "password hashing failed");
    }
    hash = std::string(buf);
  }
  std::lock_guard lock(mu_);
  auto st = db_.prepare(
      "INSERT INTO users(user_id, quota_bytes, password_hash) VALUES (?1, ?2, ?3) "
      "ON CONFLICT(user_id) DO UPDATE SET quota_bytes = excluded.quota_bytes, "
      "password_hash = COALESCE(excluded.password_hash, users.password_hash)");
  st.bind(1, id).bind(2, quota).bind(3, hash);
  st.run();
  auto q = db_.prepare("SELECT mydb_created FROM users WHERE user_id = ?1");
  q.bind(1, id);
  q.step();
  return UserAccount{id, quota, q.column_int64(0) != 0};
}

UserAccount Store::ensure_user(std::string_view user_id) {
  if (auto u = find_user(user_id)) return *u;
  const std::string id = normalize_user_id(user_id);
  std::lock_guard lock(mu_);
  auto st = db_.prepare(
      "INSERT OR IGNORE INTO users(user_id, quota_bytes) VALUES (?1, ?2)");
  st.bind(1, id).bind(2, default_quota_);
  st.run();
  return UserAccount{id, default_quota_, false};
}

std::optional<UserAccount> Store::find_user(std::string_view user_id) {
  std::string id;
  try {
    id = normalize_user_id(user_id);
  } catch (const Error&) {
    return std::nullopt;
  }
  std::lock_guard lock(mu_);
  auto st = db_.prepare("SELECT user_id, quota_bytes, mydb_created FROM users WHERE user_id = ?1");
  st.bind(1, id);
  if (!st.step()) return std::nullopt;
  return UserAccount{st.column_text(0), st.column_int64(1), st.column_int64(2) != 0};
}

UserAccount Store::get_user(std::string_view user_id) {
  if (auto u = find_user(user_id)) return *u;
  fail(ErrorCode::UnknownUser, "unknown user '" + std::string(user_id) + "'");
}

bool Store::verify_password(std::string_view user_id, std::string_view password) {
  std::optional<std::string> hash;
  {
    std::string id;
    try {
      id = normalize_user_id(user_id);
    } catch (const Error&) {
      return false;
    }
    std::lock_guard lock(mu_);
    auto st = db_.prepare("SELECT password_hash FROM users WHERE user_id = ?1");
    st.bind(1, id);
    if (!st.step()) return false;
    hash = st.column_opt_text(0);
  }
  if (!hash) return false;
  init_crypto();
  return crypto_pwhash_str_verify(hash->c_str(), password.data(), password.size()) == 0;
}

void Store::set_mydb_created(std::string_view user_id) {
  const std::string id = normalize_user_id(user_id);
  std::lock_guard lock(mu_);
  auto st = db_.prepare("UPDATE users SET mydb_created = 1 WHERE user_id = ?1");
  st.bind(1, id);
  st.run();
}

void Store::set_quota(std::string_view user_id, std::int64_t quota_bytes) {
  if (quota_bytes <= 0) fail(ErrorCode::BadRequest, "quota must be positive");
  const std::string id = normalize_user_id(user_id);
  std::lock_guard lock(mu_);
  auto st = db_.prepare("UPDATE users SET quota_bytes = ?2 WHERE user_id = ?1");
  st.bind(1, id).bind(2, quota_bytes);
  st.run();
  if (db_.changes() == 0) fail(ErrorCode::UnknownUser, "unknown user '" + id + "'");
}

JobRecord Store::create_job(const NewJob& job) {
  const UserAccount user = get_user(job.user_id);

  if (job.queue == kExtractQueue) {
    if (job.target.kind != TargetKind::ExtractFile) {
      fail(ErrorCode::TargetRequired, "the extract queue only accepts extraction targets");
    }
  } else {
    const QueueSpec& q = queues_.get(job.queue);
    if (job.target.kind == TargetKind::ExtractFile) {
      fail(ErrorCode::TargetRequired, "extraction targets run in the extract queue");
    }
    if (q.requires_mydb_target && job.target.kind != TargetKind::IntoMyDb) {
      fail(ErrorCode::TargetRequired,
           "queue '" + q.name + "' requires a select-into MyDB target");
    }
    if (job.autocomplete && q.next_queue) {
      const QueueSpec& next = queues_.get(*q.next_queue);
      if (next.requires_mydb_target && job.target.kind != TargetKind::IntoMyDb) {
        fail(ErrorCode::TargetRequired,
             "autocomplete into queue '" + next.name + "' requires a select-into MyDB target");
      }
    }
    if (job.promotion_count > static_cast<int>(queues_.size()) - 1) {
      fail(ErrorCode::BadRequest, "promotion_count exceeds the queue chain length");
    }
  }
  if (job.target.kind == TargetKind::IntoMyDb && job.target.table.empty()) {
    fail(ErrorCode::TargetRequired, "MyDB target table name is empty");
  }

  std::lock_guard lock(mu_);
  const std::int64_t now = std::max(now_ms(), last_stamp_);
  last_stamp_ = now;
  auto st = db_.prepare(
      "INSERT INTO jobs(user_id, queue, query_text, state, target_kind, target_table, "
      "target_format, submitted_at, parent_job, promotion_count, autocomplete, fingerprint) "
      "VALUES (?1, ?2, ?3, 'SUBMITTED', ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11)");
  st.bind(1, user.user_id)
      .bind(2, job.queue)
      .bind(3, job.query_text)
      .bind(4, target_kind_name(job.target.kind))
      .bind(5, job.target.table)
      .bind(6, job.target.format)
      .bind(7, now)
      .bind(8, job.parent_job)
      .bind(9, job.promotion_count)
      .bind(10, job.autocomplete ? 1 : 0)
      .bind(11, job.fingerprint);
  st.run();
  return load_job_locked(db_.last_insert_rowid());
}

JobRecord Store::load_job_locked(JobId id) {
  auto st = db_.prepare(std::string("SELECT ") + kJobColumns + " FROM jobs WHERE job_id = ?1");
  st.bind(1, id);
  if (!st.step()) fail(ErrorCode::UnknownJob, "unknown job " + std::to_string(id));
  return read_job(st);
}

JobRecord Store::get_job(JobId id) {
  std::lock_guard lock(mu_);
  return load_job_locked(id);
}

JobRecord Store::transition(JobId id, JobState to, const TransitionUpdate& update) {
  std::lock_guard lock(mu_);
  JobRecord rec = load_job_locked(id);
  if (!is_legal_transition(rec.state, to)) {
    fail(ErrorCode::IllegalTransition, "job " + std::to_string(id) + ": " +
                                           std::string(state_name(rec.state)) + " -> " +
                                           std::string(state_name(to)) + " is not allowed");
  }
  const JobState from = rec.state;
  std::int64_t now = std::max(now_ms(), last_stamp_);
  last_stamp_ = now;
  now = std::max(now, rec.started_at.value_or(rec.submitted_at));

  rec.state = to;
  if (to == JobState::Started) rec.started_at = now;
  if (is_terminal(to)) rec.finished_at = now;
  if (update.error) rec.error = update.error;
  if (update.rows_produced) rec.rows_produced = *update.rows_produced;
  if (update.output_url) rec.output_url = update.output_url;
  if (update.worker) rec.worker = *update.worker;
  assert_record(rec);

  auto st = db_.prepare(
      "UPDATE jobs SET state = ?2, started_at = ?3, finished_at = ?4, error = ?5, "
      "rows_produced = ?6, output_url = ?7, worker = ?8 WHERE job_id = ?1 AND state = ?9");
  st.bind(1, id)
      .bind(2, state_name(to))
      .bind(3, rec.started_at)
      .bind(4, rec.finished_at)
      .bind(5, rec.error)
      .bind(6, rec.rows_produced)
      .bind(7, rec.output_url)
      .bind(8, rec.worker)
      .bind(9, state_name(from));
  st.run();
  if (db_.changes() != 1) {
    fail(ErrorCode::IllegalTransition, "job " + std::to_string(id) + " changed concurrently");
  }
  return rec;
}

std::vector<JobRecord> Store::list_jobs(std::string_view user_id, const JobFilter& filter) {
  const UserAccount user = get_user(user_id);
  std::string sql = std::string("SELECT ") + kJobColumns + " FROM jobs WHERE user_id = ?1";
  if (filter.state) sql += " AND state = ?2";
  if (filter.queue) sql += " AND queue = ?3";
  if (filter.submitted_from) sql += " AND submitted_at >= ?4";
  if (filter.submitted_to) sql += " AND submitted_at <= ?5";
  sql += " ORDER BY job_id DESC";

  std::lock_guard lock(mu_);
  auto st = db_.prepare(sql);
  st.bind(1, user.user_id);
  if (filter.state) st.bind(2, state_name(*filter.state));
  if (filter.queue) st.bind(3, *filter.queue);
  if (filter.submitted_from) st.bind(4, *filter.submitted_from);
  if (filter.submitted_to) st.bind(5, *filter.submitted_to);
  std::vector<JobRecord> out;
  while (st.step()) out.push_back(read_job(st));
  return out;
}

JobRecord Store::resubmit(JobId id) {
  const JobRecord original = get_job(id);
  if (!is_terminal(original.state)) {
    fail(ErrorCode::NotTerminal, "job " + std::to_string(id) + " is still " +
                                     std::string(state_name(original.state)));
  }
  NewJob clone;
  clone.user_id = original.user_id;
  clone.query_text = original.query_text;
  clone.queue = original.queue;
  clone.target = original.target;
  clone.autocomplete = original.autocomplete;
  clone.fingerprint = original.fingerprint;
  clone.parent_job = original.job_id;
  clone.promotion_count = original.promotion_count;
  return create_job(clone);
}

std::vector<JobRecord> Store::active_jobs() {
  std::lock_guard lock(mu_);
  auto st = db_.prepare(std::string("SELECT ") + kJobColumns +
                        " FROM jobs WHERE state IN ('SUBMITTED', 'STARTED') ORDER BY job_id");
  std::vector<JobRecord> out;
  while (st.step()) out.push_back(read_job(st));
  return out;
}

std::vector<double> Store::succeeded_durations(std::string_view fingerprint) {
  std::lock_guard lock(mu_);
  auto st = db_.prepare(
      "SELECT finished_at - started_at FROM jobs WHERE fingerprint = ?1 AND state = 'SUCCEEDED' "
      "AND started_at IS NOT NULL AND finished_at IS NOT NULL");
  st.bind(1, fingerprint);
  std::vector<double> out;
  while (st.step()) out.push_back(static_cast<double>(st.column_int64(0)) / 1000.0);
  return out;
}

std::vector<JobId> Store::recover_orphans() {
  std::vector<JobId> ids;
  {
    std::lock_guard lock(mu_);
    auto st = db_.prepare("SELECT job_id FROM jobs WHERE state = 'STARTED' ORDER BY job_id");
    while (st.step()) ids.push_back(st.column_int64(0));
  }
  for (JobId id : ids) {
    TransitionUpdate u;
    u.error = "orphaned by restart";
    transition(id, JobState::Failed, u);
  }
  return ids;
}

}  // namespace casq

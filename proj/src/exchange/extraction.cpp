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

#include "casq/exchange/extraction.hpp"

#include "casq/core/error.hpp"
#include "casq/core/queue.hpp"

namespace casq::exchange {

using sqlrewrite::Scope;
using sqlrewrite::TableRef;

TableRef resolve_export_table(std::string_view user, std::string_view table_text) {
  TableRef ref = TableRef::parse(table_text);
  const std::string me = normalize_user_id(user);
  switch (ref.scope) {
    case Scope::Public:
      if (table_text.find('.') != std::string_view::npos) {
        fail(ErrorCode::BadRequest, "only MyDB and GROUP tables can be exported");
      }
      ref = TableRef{Scope::MyDb, me, ref.table};
      break;
    case Scope::MyDb:
      ref.owner = me;
      break;
    case Scope::Group:
      break;
  }
  return ref;
}

ExtractionProcessor::ExtractionProcessor(Store& store, mydb::MyDbManager& mydb, mydb::Groups& groups,
                                         FileStore& files, std::size_t workers, std::size_t batch_rows)
    : store_(store), mydb_(mydb), groups_(groups), files_(files), batch_rows_(batch_rows == 0 ? 1024 : batch_rows) {
  if (workers == 0) workers = 1;
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this, i] { worker_loop(i); });
}

ExtractionProcessor::~ExtractionProcessor() { stop(); }

JobRecord ExtractionProcessor::enqueue_export(const ExportRequest& req) {
  const ExportFormat format = parse_export_format(req.format);
  const std::string user = normalize_user_id(req.user_id);
  store_.get_user(user);
  const TableRef ref = resolve_export_table(user, req.table);
  if (!mydb_.table_exists(ref.owner, ref.table)) {
    if (ref.owner == user) fail(ErrorCode::NoSuchTable, "MyDB table '" + ref.table + "' does not exist");
    fail(ErrorCode::AccessDenied, "no access to " + ref.to_string());
  }
  if (!groups_.check_access(user, ref.owner, ref.table)) {
    fail(ErrorCode::AccessDenied, "no access to " + ref.to_string());
  }
  NewJob job;
  job.user_id = user;
  job.queue = std::string(kExtractQueue);
  job.query_text = "EXTRACT " + ref.to_string() + " FORMAT " + std::string(format_name(format));
  job.target = JobTarget::extract_file(ref.to_string(), std::string(format_name(format)));
  std::lock_guard lock(mu_);
  if (stopping_) fail(ErrorCode::QueueStopped, "extraction processor is stopped");
  JobRecord rec = store_.create_job(job);
  queue_.push_back(rec.job_id);
  cv_.notify_one();
  return rec;
}

void ExtractionProcessor::submit(JobId id) {
  const JobRecord rec = store_.get_job(id);
  if (rec.queue != kExtractQueue) fail(ErrorCode::BadRequest, "job " + std::to_string(id) + " is not an extraction");
  if (rec.state != JobState::Submitted) return;
  std::lock_guard lock(mu_);
  if (stopping_) fail(ErrorCode::QueueStopped, "extraction processor is stopped");
  queue_.push_back(id);
  cv_.notify_one();
}

bool ExtractionProcessor::cancel(JobId id) {
  std::unique_lock lock(mu_);
  for (auto it = queue_.begin(); it != queue_.end(); ++it) {
    if (*it == id) {
      queue_.erase(it);
      lock.unlock();
      TransitionUpdate u;
      u.error = "cancelled by user";
      const JobRecord rec = store_.transition(id, JobState::Cancelled, u);
      std::function<void(const JobRecord&)> cb;
      {
        std::lock_guard l2(mu_);
        cb = on_finished_;
      }
      if (cb) cb(rec);
      done_cv_.notify_all();
      return true;
    }
  }
  if (running_.count(id)) {
    cancel_requests_.insert(id);
    return true;
  }
  return false;
}

std::optional<JobRecord> ExtractionProcessor::wait(JobId id, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::unique_lock lock(mu_);
  while (true) {
    JobRecord rec = store_.get_job(id);
    if (is_terminal(rec.state)) return rec;
    if (done_cv_.wait_until(lock, deadline) == std::cv_status::timeout) {
      rec = store_.get_job(id);
      if (is_terminal(rec.state)) return rec;
      return std::nullopt;
    }
  }
}

void ExtractionProcessor::wait_idle() {
  std::unique_lock lock(mu_);
  done_cv_.wait(lock, [&] { return queue_.empty() && running_.empty(); });
}

void ExtractionProcessor::stop() {
  std::vector<JobId> dropped;
  {
    std::lock_guard lock(mu_);
    if (stopping_ && threads_.empty()) return;
    stopping_ = true;
    for (JobId id : running_) cancel_requests_.insert(id);
    // Queued jobs stay SUBMITTED for recovery on the next start.
    queue_.clear();
    cv_.notify_all();
  }
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
  done_cv_.notify_all();
}

void ExtractionProcessor::set_on_finished(std::function<void(const JobRecord&)> fn) {
  std::lock_guard lock(mu_);
  on_finished_ = std::move(fn);
}

void ExtractionProcessor::worker_loop(std::size_t index) {
  const std::string worker = std::string(kExtractQueue) + "#" + std::to_string(index);
  while (true) {
    JobId id = 0;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      running_.insert(id);
    }
    run(id, worker);
    std::function<void(const JobRecord&)> cb;
    {
      std::lock_guard lock(mu_);
      running_.erase(id);
      cancel_requests_.erase(id);
      cb = on_finished_;
    }
    if (cb) {
      try {
        cb(store_.get_job(id));
      } catch (...) {
      }
    }
    done_cv_.notify_all();
  }
}

void ExtractionProcessor::run(JobId id, const std::string& worker) {
  JobRecord rec;
  try {
    TransitionUpdate start;
    start.worker = worker;
    rec = store_.transition(id, JobState::Started, start);
  } catch (const Error&) {
    return;  // withdrawn meanwhile
  }
  auto cancelled = [&] {
    std::lock_guard lock(mu_);
    return cancel_requests_.count(id) > 0;
  };
  try {
    const TableRef ref = TableRef::parse(rec.target.table);
    const std::string owner = ref.scope == Scope::MyDb ? rec.user_id : ref.owner;
    // Access is checked again: a publication may have been revoked since.
    if (!groups_.check_access(rec.user_id, owner, ref.table)) {
      if (owner == rec.user_id) fail(ErrorCode::NoSuchTable, "MyDB table '" + ref.table + "' does not exist");
      fail(ErrorCode::AccessDenied, "no access to " + rec.target.table);
    }
    FileSink sink(files_, parse_export_format(rec.target.format), ref.table);
    std::int64_t rows = 0;
    bool have_schema = false;
    mydb_.read_table(owner, ref.table, batch_rows_, [&](const Schema& schema, const std::vector<Row>& batch) {
      if (cancelled()) fail(ErrorCode::BadRequest, "cancelled");
      if (!have_schema) {
        sink.on_schema(schema);
        have_schema = true;
      }
      sink.on_batch(batch);
      rows += static_cast<std::int64_t>(batch.size());
    });
    if (!have_schema) sink.on_schema(mydb_.get_table(owner, ref.table).columns);
    if (cancelled()) fail(ErrorCode::BadRequest, "cancelled");
    const auto url = sink.finish();
    TransitionUpdate done;
    done.rows_produced = rows;
    done.output_url = url;
    store_.transition(id, JobState::Succeeded, done);
  } catch (const std::exception& e) {
    TransitionUpdate u;
    const bool was_cancel = cancelled();
    bool shutdown = false;
    {
      std::lock_guard lock(mu_);
      shutdown = stopping_;
    }
    std::string message = e.what();
    if (const auto* err = dynamic_cast<const Error*>(&e)) message = std::string(code_name(err->code())) + ": " + message;
    u.error = was_cancel ? (shutdown ? "interrupted by shutdown" : "cancelled by user") : message;
    try {
      store_.transition(id, was_cancel ? JobState::Cancelled : JobState::Failed, u);
    } catch (const Error&) {
    }
  }
}

}  // namespace casq::exchange

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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "casq/core/store.hpp"
#include "casq/core/value.hpp"

namespace casq::scheduler {

// Cooperative cancellation: fires at a deadline or on request.
class CancelToken {
 public:
  using Clock = std::chrono::steady_clock;

  CancelToken() = default;
  explicit CancelToken(Clock::time_point deadline) : deadline_(deadline) {}

  void cancel() { cancelled_ = true; }
  bool user_cancelled() const { return cancelled_.load(); }
  bool timed_out() const { return deadline_ && Clock::now() >= *deadline_; }
  bool cancelled() const { return user_cancelled() || timed_out(); }
  std::optional<Clock::time_point> deadline() const { return deadline_; }

 private:
  std::optional<Clock::time_point> deadline_;
  std::atomic<bool> cancelled_{false};
};

// Receives the result of one job.
class ResultSink {
 public:
  virtual ~ResultSink() = default;
  virtual void on_schema(const Schema& schema) = 0;
  virtual void on_batch(const std::vector<Row>& rows) = 0;
  // Makes the result durable. Returns the output URL, if any.
  virtual std::optional<std::string> finish() = 0;
  // Discards everything written so far.
  virtual void abort() {}
};

// What the backend runs for a job.
struct ExecutionRequest {
  std::string physical_query;          // rewritten, INTO removed, TOP translated
  std::set<std::string> mydb_users;    // MyDB databases to attach
  std::optional<std::string> wheel_table;  // ride this public table's wheel
};

// Runs a query. Must poll the token at least once per row batch and stop
// delivering rows once it fires. Errors surface as casq::Error.
class ExecutionBackend {
 public:
  virtual ~ExecutionBackend() = default;
  // Returns the number of rows delivered.
  virtual std::int64_t execute(const ExecutionRequest& request, ResultSink& sink,
                               const CancelToken& token) = 0;
};

// Job-specific plumbing supplied by the service: name resolution and
// result routing.
class JobEnvironment {
 public:
  virtual ~JobEnvironment() = default;
  virtual ExecutionRequest prepare(const JobRecord& job) = 0;
  virtual std::unique_ptr<ResultSink> open_sink(const JobRecord& job) = 0;
};

struct SchedulerOptions {
  bool start = true;  // start worker threads in the constructor
};

struct QueueStats {
  std::string name;
  double time_limit_s = 0;
  int max_concurrency = 0;
  std::size_t waiting = 0;
  std::size_t running = 0;
  std::size_t peak_running = 0;  // highest concurrent STARTED count observed
  std::uint64_t started = 0;
  std::uint64_t finished = 0;
};

struct Submission {
  JobRecord job;
  std::size_t position = 0;  // earlier non-terminal jobs in the same queue
};

// Per-queue FIFO worker pools over the job store. Each queue has
// max_concurrency workers named "<queue>#<i>". A job runs until it
// finishes or its queue's time limit passes; on timeout it is KILLED, or
// PROMOTED to the successor queue when it asked for autocomplete.
class Scheduler {
 public:
  Scheduler(Store& store, JobEnvironment& env, ExecutionBackend& backend, SchedulerOptions options = {});
  ~Scheduler();
  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  void start();

  // Creates the record and enqueues it in one step, so ids and queue
  // order agree. QueueStopped while draining.
  Submission create_and_submit(const NewJob& job);
  // Enqueues an existing SUBMITTED job (recovery, resubmit).
  std::size_t submit(JobId id);
  Submission resubmit(JobId id);

  // Withdraws a queued job or signals a running one. The record ends
  // CANCELLED. IllegalTransition for terminal jobs.
  JobRecord cancel(JobId id);

  // Current position of a queued or running job; nullopt otherwise.
  std::optional<std::size_t> position(JobId id);

  // Stops accepting new jobs and waits until every queue is empty and
  // idle. Promotions made while draining still run.
  void drain();
  // Waits until every queue is empty and idle, still accepting jobs.
  void wait_idle();
  // Stops workers; running jobs are signalled, queued jobs stay SUBMITTED.
  void stop();

  std::vector<QueueStats> stats();
  // Job ids in the order workers started them, per queue.
  std::vector<JobId> start_order(const std::string& queue);

  // Called after every job reaches a terminal state (for waiters).
  void set_on_finished(std::function<void(const JobRecord&)> fn) { on_finished_ = std::move(fn); }
  // Blocks until the job is terminal or the timeout passes.
  std::optional<JobRecord> wait(JobId id, std::chrono::milliseconds timeout);

 private:
  struct Lane {
    QueueSpec spec;
    std::deque<JobId> waiting;  // ascending job ids
    std::set<JobId> running;
    std::size_t peak = 0;
    std::uint64_t started = 0;
    std::uint64_t finished = 0;
    std::vector<JobId> order;
    std::vector<std::thread> workers;
  };

  void worker(Lane& lane, int index);
  void run_job(Lane& lane, const JobRecord& job, const std::string& worker_name);
  void finish(Lane& lane, JobId id);
  std::size_t position_locked(const Lane& lane, JobId id) const;
  void enqueue_locked(Lane& lane, JobId id);
  Lane& lane(const std::string& name);

  Store& store_;
  JobEnvironment& env_;
  ExecutionBackend& backend_;
  SchedulerOptions options_;

  std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable idle_cv_;
  std::map<std::string, std::unique_ptr<Lane>> lanes_;
  std::map<JobId, std::shared_ptr<CancelToken>> tokens_;
  bool draining_ = false;
  bool stopping_ = false;
  bool started_ = false;
  std::function<void(const JobRecord&)> on_finished_;
};

}  // namespace casq::scheduler

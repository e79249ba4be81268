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

#include "casq/scheduler/scheduler.hpp"

#include <algorithm>
#include <sstream>

#include "casq/core/error.hpp"

namespace casq::scheduler {

namespace {

std::string seconds_text(double s) {
  std::ostringstream os;
  os << s;
  return os.str();
}

}  // namespace

Scheduler::Scheduler(Store& store, JobEnvironment& env, ExecutionBackend& backend, SchedulerOptions options)
    : store_(store), env_(env), backend_(backend), options_(options) {
  for (const auto& q : store_.queues().all()) {
    auto lane = std::make_unique<Lane>();
    lane->spec = q;
    lanes_.emplace(q.name, std::move(lane));
  }
  if (options_.start) start();
}

Scheduler::~Scheduler() { stop(); }

void Scheduler::start() {
  std::lock_guard lock(mu_);
  if (started_ || stopping_) return;
  started_ = true;
  for (auto& [name, lane] : lanes_) {
    for (int i = 0; i < lane->spec.max_concurrency; ++i) {
      lane->workers.emplace_back([this, l = lane.get(), i] { worker(*l, i); });
    }
  }
}

Scheduler::Lane& Scheduler::lane(const std::string& name) {
  auto it = lanes_.find(name);
  if (it == lanes_.end()) fail(ErrorCode::UnknownQueue, "no query queue named '" + name + "'");
  return *it->second;
}

void Scheduler::enqueue_locked(Lane& lane, JobId id) {
  auto pos = std::lower_bound(lane.waiting.begin(), lane.waiting.end(), id);
  if (pos != lane.waiting.end() && *pos == id) return;
  lane.waiting.insert(pos, id);
  work_cv_.notify_all();
}

std::size_t Scheduler::position_locked(const Lane& lane, JobId id) const {
  std::size_t n = 0;
  for (JobId w : lane.waiting) n += w < id ? 1 : 0;
  for (JobId r : lane.running) n += r < id ? 1 : 0;
  return n;
}

Submission Scheduler::create_and_submit(const NewJob& job) {
  std::lock_guard lock(mu_);
  if (draining_ || stopping_) fail(ErrorCode::QueueStopped, "the scheduler is not accepting jobs");
  Lane& l = lane(job.queue);
  Submission s;
  s.job = store_.create_job(job);
  enqueue_locked(l, s.job.job_id);
  s.position = position_locked(l, s.job.job_id);
  return s;
}

std::size_t Scheduler::submit(JobId id) {
  std::lock_guard lock(mu_);
  if (draining_ || stopping_) fail(ErrorCode::QueueStopped, "the scheduler is not accepting jobs");
  const JobRecord job = store_.get_job(id);
  if (job.state != JobState::Submitted) {
    fail(ErrorCode::IllegalTransition, "job " + std::to_string(id) + " is " + std::string(state_name(job.state)));
  }
  Lane& l = lane(job.queue);
  enqueue_locked(l, id);
  return position_locked(l, id);
}

Submission Scheduler::resubmit(JobId id) {
  std::lock_guard lock(mu_);
  if (draining_ || stopping_) fail(ErrorCode::QueueStopped, "the scheduler is not accepting jobs");
  const JobRecord original = store_.get_job(id);
  Lane& l = lane(original.queue);
  Submission s;
  s.job = store_.resubmit(id);
  enqueue_locked(l, s.job.job_id);
  s.position = position_locked(l, s.job.job_id);
  return s;
}

JobRecord Scheduler::cancel(JobId id) {
  std::unique_lock lock(mu_);
  const JobRecord job = store_.get_job(id);
  if (job.state == JobState::Submitted) {
    if (auto it = lanes_.find(job.queue); it != lanes_.end()) {
      auto& w = it->second->waiting;
      w.erase(std::remove(w.begin(), w.end(), id), w.end());
    }
    if (auto t = tokens_.find(id); t != tokens_.end()) {
      // Dequeued but not yet started: the worker sees the flag.
      t->second->cancel();
      return job;
    }
    JobRecord done = store_.transition(id, JobState::Cancelled, {.error = "cancelled by user"});
    idle_cv_.notify_all();
    lock.unlock();
    if (on_finished_) on_finished_(done);
    return done;
  }
  if (job.state == JobState::Started) {
    if (auto t = tokens_.find(id); t != tokens_.end()) t->second->cancel();
    return job;
  }
  fail(ErrorCode::IllegalTransition,
       "job " + std::to_string(id) + " is already " + std::string(state_name(job.state)));
}

std::optional<std::size_t> Scheduler::position(JobId id) {
  std::lock_guard lock(mu_);
  for (const auto& [name, l] : lanes_) {
    const bool queued = std::find(l->waiting.begin(), l->waiting.end(), id) != l->waiting.end();
    if (queued || l->running.count(id) != 0) return position_locked(*l, id);
  }
  return std::nullopt;
}

void Scheduler::worker(Lane& l, int index) {
  const std::string name = l.spec.name + "#" + std::to_string(index);
  std::unique_lock lock(mu_);
  while (true) {
    work_cv_.wait(lock, [&] { return stopping_ || !l.waiting.empty(); });
    if (stopping_) return;
    const JobId id = l.waiting.front();
    l.waiting.pop_front();
    l.running.insert(id);
    l.peak = std::max(l.peak, l.running.size());
    ++l.started;
    l.order.push_back(id);
    const auto limit = std::chrono::duration_cast<CancelToken::Clock::duration>(
        std::chrono::duration<double>(l.spec.time_limit_s));
    auto token = std::make_shared<CancelToken>(CancelToken::Clock::now() + limit);
    tokens_[id] = token;
    lock.unlock();

    std::optional<JobRecord> started;
    try {
      started = store_.transition(id, JobState::Started, {.worker = name});
    } catch (const Error&) {
      // Withdrawn between dequeue and start.
    }
    if (started) run_job(l, *started, name);

    lock.lock();
    finish(l, id);
    lock.unlock();
    if (on_finished_) {
      try {
        on_finished_(store_.get_job(id));
      } catch (...) {
      }
    }
    lock.lock();
  }
}

void Scheduler::finish(Lane& l, JobId id) {
  l.running.erase(id);
  tokens_.erase(id);
  ++l.finished;
  idle_cv_.notify_all();
}

void Scheduler::run_job(Lane& l, const JobRecord& job, const std::string&) {
  std::shared_ptr<CancelToken> token;
  {
    std::lock_guard lock(mu_);
    token = tokens_.at(job.job_id);
  }
  const JobId id = job.job_id;
  std::unique_ptr<ResultSink> sink;
  std::optional<std::string> failure;
  try {
    if (!token->cancelled()) {
      const ExecutionRequest req = env_.prepare(job);
      sink = env_.open_sink(job);
      const std::int64_t rows = backend_.execute(req, *sink, *token);
      if (!token->cancelled()) {
        const auto url = sink->finish();
        sink.reset();
        store_.transition(id, JobState::Succeeded, {.rows_produced = rows, .output_url = url});
        return;
      }
    }
  } catch (const Error& e) {
    failure = std::string(code_name(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    failure = e.what();
  }
  if (sink) {
    try {
      sink->abort();
    } catch (...) {
    }
  }

  bool stopping;
  {
    std::lock_guard lock(mu_);
    stopping = stopping_;
  }
  try {
    if (token->user_cancelled()) {
      store_.transition(id, JobState::Cancelled,
                        {.error = stopping ? "interrupted by shutdown" : "cancelled by user"});
    } else if (token->timed_out()) {
      const std::string limit = "time limit of " + seconds_text(l.spec.time_limit_s) + " s exceeded";
      std::optional<JobRecord> child;
      if (job.autocomplete && l.spec.next_queue) {
        try {
          child = store_.create_job({job.user_id, job.query_text, *l.spec.next_queue, job.target, true,
                                     job.fingerprint, id, job.promotion_count + 1});
        } catch (const Error& e) {
          store_.transition(id, JobState::Killed, {.error = limit + "; not promoted: " + e.what()});
          return;
        }
        store_.transition(id, JobState::Promoted,
                          {.error = limit + "; promoted to " + *l.spec.next_queue + " as job " +
                                    std::to_string(child->job_id)});
        std::lock_guard lock(mu_);
        enqueue_locked(lane(child->queue), child->job_id);
      } else {
        store_.transition(id, JobState::Killed, {.error = limit});
      }
    } else {
      store_.transition(id, JobState::Failed, {.error = failure.value_or("query failed")});
    }
  } catch (const std::exception&) {
    // The record keeps its last state; restart recovery reports it.
  }
}

void Scheduler::drain() {
  {
    std::lock_guard lock(mu_);
    draining_ = true;
  }
  wait_idle();
}

void Scheduler::wait_idle() {
  start();
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] {
    if (stopping_) return true;
    for (const auto& [name, l] : lanes_) {
      if (!l->waiting.empty() || !l->running.empty()) return false;
    }
    return true;
  });
}

void Scheduler::stop() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    for (auto& [id, t] : tokens_) t->cancel();
    for (auto& [name, l] : lanes_) {
      for (auto& t : l->workers) threads.push_back(std::move(t));
      l->workers.clear();
    }
    work_cv_.notify_all();
    idle_cv_.notify_all();
  }
  for (auto& t : threads) t.join();
}

std::vector<QueueStats> Scheduler::stats() {
  std::lock_guard lock(mu_);
  std::vector<QueueStats> out;
  for (const auto& q : store_.queues().all()) {
    const Lane& l = *lanes_.at(q.name);
    out.push_back({q.name, q.time_limit_s, q.max_concurrency, l.waiting.size(), l.running.size(), l.peak,
                   l.started, l.finished});
  }
  return out;
}

std::vector<JobId> Scheduler::start_order(const std::string& queue) {
  std::lock_guard lock(mu_);
  return lane(queue).order;
}

std::optional<JobRecord> Scheduler::wait(JobId id, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::unique_lock lock(mu_);
  while (true) {
    JobRecord job = store_.get_job(id);
    if (is_terminal(job.state)) return job;
    if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
    idle_cv_.wait_until(lock, std::min(deadline, std::chrono::steady_clock::now() + std::chrono::milliseconds(50)));
  }
}

}  // namespace casq::scheduler

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

#include "casq/wheel/shared_scan.hpp"

#include <chrono>

#include "casq/core/error.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::wheel {

namespace {
constexpr auto kPoll = std::chrono::milliseconds(10);
}

void QueueRider::on_block(std::size_t, const std::vector<Row>& rows) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || queue_.size() < capacity_; });
  if (closed_) return;
  queue_.push_back(rows);
  cv_.notify_all();
}

void QueueRider::on_done() {
  std::lock_guard lock(mu_);
  done_ = true;
  cv_.notify_all();
}

void QueueRider::on_failed(const std::string& reason) {
  std::lock_guard lock(mu_);
  error_ = reason;
  done_ = true;
  cv_.notify_all();
}

std::optional<std::vector<Row>> QueueRider::next(const std::function<bool()>& cancelled) {
  std::unique_lock lock(mu_);
  while (true) {
    if (!queue_.empty()) {
      auto block = std::move(queue_.front());
      queue_.pop_front();
      cv_.notify_all();
      return block;
    }
    if (error_) fail(ErrorCode::SessionFailed, "scan session failed: " + *error_);
    if (done_ || closed_) return std::nullopt;
    if (cancelled) {
      cv_.wait_for(lock, kPoll);
      if (cancelled()) return std::nullopt;
    } else {
      cv_.wait(lock);
    }
  }
}

void QueueRider::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  queue_.clear();
  cv_.notify_all();
}

bool QueueRider::finished() const {
  std::lock_guard lock(mu_);
  return done_ && queue_.empty();
}

SharedScan::SharedScan(std::unique_ptr<BlockStore> store, std::optional<std::size_t> entry_points)
    : store_(std::move(store)), wheel_(*store_, entry_points) {
  stats_ = wheel_.stats();
  thread_ = std::thread([this] { loop(); });
}

SharedScan::~SharedScan() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
    for (auto& [id, r] : riders_) {
      if (auto* q = dynamic_cast<QueueRider*>(r.get())) q->close();
    }
    cv_.notify_all();
  }
  thread_.join();
}

SessionId SharedScan::attach(std::string_view table, std::shared_ptr<Rider> rider) {
  if (sqlrewrite::to_lower(table) != sqlrewrite::to_lower(store_->table())) {
    fail(ErrorCode::WrongTable, "wheel serves " + store_->table() + ", not " + std::string(table));
  }
  const SessionId id = next_id_++;
  std::lock_guard lock(mu_);
  if (stop_) fail(ErrorCode::SessionFailed, "wheel is stopping");
  riders_[id] = rider;
  pending_.push_back({true, id, std::move(rider)});
  SessionInfo info;
  info.id = id;
  snapshot_[id] = info;
  cv_.notify_all();
  return id;
}

void SharedScan::detach(SessionId id) {
  std::shared_ptr<Rider> rider;
  {
    std::lock_guard lock(mu_);
    auto it = riders_.find(id);
    if (it != riders_.end()) rider = it->second;
    pending_.push_back({false, id, nullptr});
    cv_.notify_all();
  }
  // Release the wheel if it is blocked delivering to this rider.
  if (auto* q = dynamic_cast<QueueRider*>(rider.get())) q->close();
}

void SharedScan::publish_locked() {
  stats_ = wheel_.stats();
  for (auto it = riders_.begin(); it != riders_.end();) {
    SessionInfo info;
    try {
      info = wheel_.session(it->first);
    } catch (const Error&) {
      ++it;
      continue;
    }
    snapshot_[it->first] = info;
    if (info.state != SessionState::Waiting && info.state != SessionState::Riding) {
      it = riders_.erase(it);
    } else {
      ++it;
    }
  }
  while (snapshot_.size() > 4096) snapshot_.erase(snapshot_.begin());
}

void SharedScan::loop() {
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait(lock, [&] { return stop_ || !pending_.empty() || !wheel_.idle(); });
    if (stop_) break;
    // Block boundary: apply queued requests.
    auto requests = std::move(pending_);
    pending_.clear();
    for (auto& r : requests) {
      if (r.attach) {
        wheel_.attach(store_->table(), std::move(r.rider), r.id);
      } else {
        wheel_.detach(r.id);
      }
    }
    publish_locked();
    if (wheel_.idle()) {
      cv_.notify_all();
      continue;
    }
    busy_ = true;
    lock.unlock();
    wheel_.advance();
    lock.lock();
    busy_ = false;
    publish_locked();
    cv_.notify_all();
  }
  // Fail whoever is still attached.
  for (auto& [id, r] : riders_) r->on_failed("wheel stopped");
  riders_.clear();
}

WheelStats SharedScan::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::optional<SessionInfo> SharedScan::session(SessionId id) const {
  std::lock_guard lock(mu_);
  auto it = snapshot_.find(id);
  if (it == snapshot_.end()) return std::nullopt;
  return it->second;
}

void SharedScan::wait_idle() const {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return stop_ || (pending_.empty() && !busy_ && riders_.empty()); });
}

WheelRegistry::WheelRegistry(std::filesystem::path catalog, std::size_t block_rows,
                             std::optional<std::size_t> entry_points)
    : catalog_(std::move(catalog)), block_rows_(block_rows), entry_points_(entry_points) {}

SharedScan& WheelRegistry::get(const std::string& table_in) {
  const std::string table = sqlrewrite::to_lower(table_in);
  std::lock_guard lock(mu_);
  auto& slot = wheels_[table];
  if (!slot) {
    try {
      auto store = std::make_unique<SqliteBlockStore>(catalog_, table, block_rows_);
      std::optional<std::size_t> k = entry_points_;
      if (k && store->block_count() > 0) k = std::min(*k, store->block_count());
      slot = std::make_unique<SharedScan>(std::move(store), k);
    } catch (...) {
      wheels_.erase(table);
      throw;
    }
  }
  return *slot;
}

SharedScan* WheelRegistry::find(const std::string& table) {
  std::lock_guard lock(mu_);
  auto it = wheels_.find(sqlrewrite::to_lower(table));
  return it == wheels_.end() ? nullptr : it->second.get();
}

std::vector<WheelStats> WheelRegistry::stats() const {
  std::lock_guard lock(mu_);
  std::vector<WheelStats> out;
  for (const auto& [name, w] : wheels_) out.push_back(w->stats());
  return out;
}

}  // namespace casq::wheel

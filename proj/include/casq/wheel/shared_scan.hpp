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
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "casq/wheel/wheel.hpp"

namespace casq::wheel {

// A rider that hands blocks to a consumer thread through a bounded queue.
// A full queue blocks the wheel (backpressure) until the consumer catches
// up or the rider is closed.
class QueueRider : public Rider {
 public:
  explicit QueueRider(std::size_t capacity = 4) : capacity_(capacity == 0 ? 1 : capacity) {}

  void on_block(std::size_t index, const std::vector<Row>& rows) override;
  void on_done() override;
  void on_failed(const std::string& reason) override;

  // Next block, or nullopt after the last one. Polls `cancelled` while
  // waiting and returns nullopt if it turns true. SessionFailed if the
  // wheel failed the session.
  std::optional<std::vector<Row>> next(const std::function<bool()>& cancelled = {});
  // Unblocks the wheel and discards anything queued.
  void close();
  bool finished() const;

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<Row>> queue_;
  bool done_ = false;
  bool closed_ = false;
  std::optional<std::string> error_;
};

// A wheel driven by its own thread. attach/detach requests queue up and
// take effect at the next block boundary.
class SharedScan {
 public:
  SharedScan(std::unique_ptr<BlockStore> store, std::optional<std::size_t> entry_points = std::nullopt);
  ~SharedScan();
  SharedScan(const SharedScan&) = delete;
  SharedScan& operator=(const SharedScan&) = delete;

  const std::string& table() const { return store_->table(); }
  const Schema& schema() const { return store_->schema(); }
  std::size_t block_count() const { return store_->block_count(); }

  // WrongTable if table differs.
  SessionId attach(std::string_view table, std::shared_ptr<Rider> rider);
  // Stops delivery to the session; queued blocks are dropped.
  void detach(SessionId id);

  WheelStats stats() const;
  std::optional<SessionInfo> session(SessionId id) const;
  // Blocks until no session is waiting or riding.
  void wait_idle() const;

 private:
  struct Request {
    bool attach = true;
    SessionId id = 0;
    std::shared_ptr<Rider> rider;
  };
  void loop();
  void publish_locked();

  std::unique_ptr<BlockStore> store_;
  Wheel wheel_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<Request> pending_;
  std::map<SessionId, std::shared_ptr<Rider>> riders_;
  std::map<SessionId, SessionInfo> snapshot_;
  WheelStats stats_;
  bool busy_ = false;
  bool stop_ = false;
  std::atomic<SessionId> next_id_{1};
  std::thread thread_;
};

// One SharedScan per catalog table that has been opened for riding.
class WheelRegistry {
 public:
  WheelRegistry(std::filesystem::path catalog, std::size_t block_rows = kDefaultBlockRows,
                std::optional<std::size_t> entry_points = std::nullopt);

  // Opens the wheel for a table on first use. NoSuchTable if absent.
  SharedScan& get(const std::string& table);
  SharedScan* find(const std::string& table);
  std::vector<WheelStats> stats() const;

 private:
  std::filesystem::path catalog_;
  std::size_t block_rows_;
  std::optional<std::size_t> entry_points_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<SharedScan>> wheels_;
};

}  // namespace casq::wheel

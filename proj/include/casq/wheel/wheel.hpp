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
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "casq/wheel/block_store.hpp"
#include "casq/wheel/entry_points.hpp"

namespace casq::wheel {

using SessionId = std::uint64_t;

enum class SessionState { Waiting, Riding, Done, Failed, Detached };
std::string_view session_state_name(SessionState s);

// Receives the blocks of one revolution. Called on the wheel's delivery
// path; a slow rider holds the wheel back.
class Rider {
 public:
  virtual ~Rider() = default;
  virtual void on_block(std::size_t index, const std::vector<Row>& rows) = 0;
  virtual void on_done() {}
  virtual void on_failed(const std::string& /*reason*/) {}
};

struct SessionInfo {
  SessionId id = 0;
  SessionState state = SessionState::Waiting;
  std::optional<std::size_t> entry_block;
  std::size_t delivered = 0;
  std::uint64_t attached_at = 0;                 // wheel advance count at attach
  std::optional<std::uint64_t> activated_at;     // advance count at activation
  std::vector<std::size_t> delivery_order;       // block indices, in order
  std::string error;
};

struct WheelStats {
  std::string table;
  std::size_t block_count = 0;
  std::size_t cursor = 0;
  bool running = false;
  std::size_t riders = 0;
  std::size_t waiting = 0;
  std::uint64_t total_reads = 0;       // block reads issued by this wheel
  std::uint64_t blocks_delivered = 0;  // reads a per-query scan would have issued
  std::uint64_t blocks_saved = 0;      // blocks_delivered - total_reads
  std::uint64_t restarts = 0;          // idle -> running transitions
};

// The shared scan. A single caller drives it: attach and detach take
// effect between advances, which are the block boundaries.
//
// The cursor names the next block to read. An idle wheel starts at block
// 0 for its first rider. Later riders wait until the cursor sits on an
// entry point and then take exactly one revolution from there. When the
// last rider finishes the wheel stops; if sessions are still waiting the
// cursor skips ahead to the next entry point without reading.
class Wheel {
 public:
  explicit Wheel(BlockStore& store, std::optional<std::size_t> entry_points = std::nullopt);

  const std::string& table() const { return store_.table(); }
  const std::vector<std::size_t>& entry_points() const { return entries_; }
  std::size_t cursor() const { return cursor_; }
  bool idle() const { return riding_.empty() && waiting_.empty(); }

  // WrongTable when table names another table (case-insensitive).
  SessionId attach(std::string_view table, std::shared_ptr<Rider> rider);
  SessionId attach(std::string_view table, std::shared_ptr<Rider> rider, SessionId id);
  // Removes a waiting or riding session; it is not notified.
  void detach(SessionId id);

  // Reads one block and delivers it. Returns false when idle.
  bool advance();
  void run_until_idle();

  SessionInfo session(SessionId id) const;
  WheelStats stats() const;

 private:
  struct Session {
    SessionInfo info;
    std::shared_ptr<Rider> rider;
    std::set<std::size_t> seen;
  };

  bool is_entry(std::size_t block) const;
  void activate_waiting();
  void finish(Session& s, SessionState state, const std::string& error = {});
  void prune();

  BlockStore& store_;
  std::vector<std::size_t> entries_;
  std::size_t cursor_ = 0;
  std::uint64_t advances_ = 0;
  std::uint64_t reads_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t restarts_ = 0;
  SessionId next_id_ = 1;
  std::map<SessionId, Session> sessions_;
  std::vector<SessionId> riding_;
  std::vector<SessionId> waiting_;
  std::deque<SessionId> finished_;
};

// Collects the rows of each delivered block that satisfy a predicate.
class CollectingRider : public Rider {
 public:
  using Predicate = std::function<bool(const Row&)>;
  explicit CollectingRider(Predicate pred = {}) : pred_(std::move(pred)) {}

  void on_block(std::size_t index, const std::vector<Row>& rows) override;
  void on_done() override { done_ = true; }
  void on_failed(const std::string& reason) override { error_ = reason; }

  bool done() const { return done_; }
  // Matching rows in delivery order. SessionFailed if the session failed.
  const std::vector<Row>& results() const;
  const std::vector<std::size_t>& blocks() const { return blocks_; }

 private:
  Predicate pred_;
  std::vector<Row> rows_;
  std::vector<std::size_t> blocks_;
  bool done_ = false;
  std::optional<std::string> error_;
};

}  // namespace casq::wheel

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

#include "casq/wheel/wheel.hpp"

#include <algorithm>

#include "casq/core/error.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::wheel {

namespace {
constexpr std::size_t kKeepFinished = 4096;
}

std::string_view session_state_name(SessionState s) {
  switch (s) {
    case SessionState::Waiting: return "WAITING";
    case SessionState::Riding: return "RIDING";
    case SessionState::Done: return "DONE";
    case SessionState::Failed: return "FAILED";
    case SessionState::Detached: return "DETACHED";
  }
  return "?";
}

Wheel::Wheel(BlockStore& store, std::optional<std::size_t> entry_points) : store_(store) {
  const std::size_t b = store_.block_count();
  if (b > 0) {
    entries_ = plan_entry_points(b, entry_points.value_or(default_entry_count(b)));
  } else if (entry_points && *entry_points != 1) {
    plan_entry_points(b, *entry_points);  // throws BadK
  }
}

bool Wheel::is_entry(std::size_t block) const {
  return std::binary_search(entries_.begin(), entries_.end(), block);
}

SessionId Wheel::attach(std::string_view table, std::shared_ptr<Rider> rider) {
  return attach(table, std::move(rider), next_id_);
}

SessionId Wheel::attach(std::string_view table, std::shared_ptr<Rider> rider, SessionId id) {
  if (sqlrewrite::to_lower(table) != sqlrewrite::to_lower(store_.table())) {
    fail(ErrorCode::WrongTable, "wheel serves " + store_.table() + ", not " + std::string(table));
  }
  if (sessions_.count(id) != 0) fail(ErrorCode::BadRequest, "duplicate wheel session id");
  next_id_ = std::max(next_id_, id + 1);
  Session& s = sessions_[id];
  s.info.id = id;
  s.info.attached_at = advances_;
  s.rider = std::move(rider);

  if (store_.block_count() == 0) {
    s.info.activated_at = advances_;
    finish(s, SessionState::Done);
    return id;
  }
  const bool was_idle = idle();
  if (was_idle) {
    cursor_ = 0;
    ++restarts_;
  }
  if (was_idle || is_entry(cursor_)) {
    s.info.state = SessionState::Riding;
    s.info.entry_block = cursor_;
    s.info.activated_at = advances_;
    riding_.push_back(id);
  } else {
    waiting_.push_back(id);
  }
  return id;
}

void Wheel::detach(SessionId id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  if (s.info.state != SessionState::Waiting && s.info.state != SessionState::Riding) return;
  riding_.erase(std::remove(riding_.begin(), riding_.end(), id), riding_.end());
  waiting_.erase(std::remove(waiting_.begin(), waiting_.end(), id), waiting_.end());
  s.info.state = SessionState::Detached;
  s.rider.reset();
  finished_.push_back(id);
  prune();
}

void Wheel::activate_waiting() {
  for (SessionId id : waiting_) {
    Session& s = sessions_.at(id);
    s.info.state = SessionState::Riding;
    s.info.entry_block = cursor_;
    s.info.activated_at = advances_;
    riding_.push_back(id);
  }
  waiting_.clear();
}

void Wheel::finish(Session& s, SessionState state, const std::string& error) {
  s.info.state = state;
  s.info.error = error;
  auto rider = std::move(s.rider);
  finished_.push_back(s.info.id);
  if (rider) {
    if (state == SessionState::Done) {
      rider->on_done();
    } else {
      rider->on_failed(error);
    }
  }
  prune();
}

void Wheel::prune() {
  while (finished_.size() > kKeepFinished) {
    sessions_.erase(finished_.front());
    finished_.pop_front();
  }
}

bool Wheel::advance() {
  if (riding_.empty()) {
    if (waiting_.empty()) return false;
    // Nobody needs the blocks before the next entry point.
    while (!is_entry(cursor_)) cursor_ = (cursor_ + 1) % store_.block_count();
    activate_waiting();
  }
  const std::size_t b = store_.block_count();
  const std::size_t block = cursor_;
  std::vector<Row> rows;
  ++reads_;
  try {
    rows = store_.read_block(block);
  } catch (const std::exception& e) {
    const std::string why = std::string("block read failed: ") + e.what();
    auto ids = riding_;
    riding_.clear();
    for (SessionId id : ids) finish(sessions_.at(id), SessionState::Failed, why);
    ++advances_;
    cursor_ = (cursor_ + 1) % b;
    if (is_entry(cursor_)) activate_waiting();
    return true;
  }

  std::vector<SessionId> still;
  for (SessionId id : riding_) {
    Session& s = sessions_.at(id);
    try {
      s.rider->on_block(block, rows);
    } catch (const std::exception& e) {
      finish(s, SessionState::Failed, e.what());
      continue;
    }
    ++delivered_;
    ++s.info.delivered;
    s.info.delivery_order.push_back(block);
    s.seen.insert(block);
    if (s.info.delivered == b) {
      finish(s, SessionState::Done);
    } else {
      still.push_back(id);
    }
  }
  riding_ = std::move(still);
  ++advances_;
  cursor_ = (cursor_ + 1) % b;
  if (is_entry(cursor_)) activate_waiting();
  return true;
}

void Wheel::run_until_idle() {
  while (advance()) {
  }
}

SessionInfo Wheel::session(SessionId id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::NotFound, "no wheel session " + std::to_string(id));
  return it->second.info;
}

WheelStats Wheel::stats() const {
  WheelStats st;
  st.table = store_.table();
  st.block_count = store_.block_count();
  st.cursor = cursor_;
  st.running = !idle();
  st.riders = riding_.size();
  st.waiting = waiting_.size();
  st.total_reads = reads_;
  st.blocks_delivered = delivered_;
  st.blocks_saved = delivered_ > reads_ ? delivered_ - reads_ : 0;
  st.restarts = restarts_;
  return st;
}

void CollectingRider::on_block(std::size_t index, const std::vector<Row>& rows) {
  blocks_.push_back(index);
  for (const auto& r : rows) {
    if (!pred_ || pred_(r)) rows_.push_back(r);
  }
}

const std::vector<Row>& CollectingRider::results() const {
  if (error_) fail(ErrorCode::SessionFailed, "scan session failed: " + *error_);
  return rows_;
}

}  // namespace casq::wheel

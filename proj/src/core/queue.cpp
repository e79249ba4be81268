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

#include "casq/core/queue.hpp"

#include <algorithm>
#include <set>

#include "casq/core/error.hpp"

namespace casq {

QueueSet::QueueSet(std::vector<QueueSpec> queues) : queues_(std::move(queues)) {
  if (queues_.empty()) fail(ErrorCode::BadRequest, "at least one queue is required");
  std::sort(queues_.begin(), queues_.end(),
            [](const QueueSpec& a, const QueueSpec& b) { return a.time_limit_s < b.time_limit_s; });
  std::set<std::string> names;
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    const QueueSpec& q = queues_[i];
    if (q.name.empty() || q.name == kExtractQueue || !names.insert(q.name).second) {
      fail(ErrorCode::BadRequest, "invalid or duplicate queue name '" + q.name + "'");
    }
    if (q.time_limit_s <= 0) fail(ErrorCode::BadRequest, "queue " + q.name + ": limit must be > 0");
    if (i > 0 && !(queues_[i - 1].time_limit_s < q.time_limit_s)) {
      fail(ErrorCode::BadRequest, "queue time limits must be strictly increasing");
    }
    if (q.max_concurrency < 1) {
      fail(ErrorCode::BadRequest, "queue " + q.name + ": max_concurrency must be >= 1");
    }
    if (q.requires_mydb_target != (i > 0)) {
      fail(ErrorCode::BadRequest,
           "queue " + q.name + ": only the shortest queue may return rows directly");
    }
  }
  for (const QueueSpec& q : queues_) {
    if (!q.next_queue) continue;
    const QueueSpec* next = find(*q.next_queue);
    if (next == nullptr || !(next->time_limit_s > q.time_limit_s)) {
      fail(ErrorCode::BadRequest, "queue " + q.name + ": successor must be a longer queue");
    }
  }
}

QueueSet QueueSet::defaults() {
  return QueueSet({
      {"short", 60, 8, std::string("long"), false},
      {"long", 28800, 2, std::nullopt, true},
  });
}

const QueueSpec* QueueSet::find(std::string_view name) const {
  for (const QueueSpec& q : queues_) {
    if (q.name == name) return &q;
  }
  return nullptr;
}

const QueueSpec& QueueSet::get(std::string_view name) const {
  if (const QueueSpec* q = find(name)) return *q;
  fail(ErrorCode::UnknownQueue, "unknown queue '" + std::string(name) + "'");
}

}  // namespace casq

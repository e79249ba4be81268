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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace casq {

// Name of the extraction job queue. It sits outside the query-queue chain
// and is served by its own processor.
inline constexpr std::string_view kExtractQueue = "extract";

struct QueueSpec {
  std::string name;
  double time_limit_s = 60;
  int max_concurrency = 1;
  std::optional<std::string> next_queue;
  bool requires_mydb_target = false;
};

// The ordered set of query queues. Construction validates:
//  - names unique and distinct from the extraction queue,
//  - strictly increasing time limits,
//  - max_concurrency >= 1,
//  - next_queue (if set) names a queue with a larger limit,
//  - requires_mydb_target on every queue but the shortest.
class QueueSet {
 public:
  explicit QueueSet(std::vector<QueueSpec> queues);

  // short: 60 s, 8 workers, rows may be returned directly.
  // long: 28 800 s, 2 workers, results must go to MyDB.
  static QueueSet defaults();

  const std::vector<QueueSpec>& all() const { return queues_; }
  const QueueSpec* find(std::string_view name) const;
  const QueueSpec& get(std::string_view name) const;  // UnknownQueue
  const QueueSpec& shortest() const { return queues_.front(); }
  const QueueSpec& longest() const { return queues_.back(); }
  std::size_t size() const { return queues_.size(); }

 private:
  std::vector<QueueSpec> queues_;
};

}  // namespace casq

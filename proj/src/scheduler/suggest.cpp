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

#include "casq/scheduler/suggest.hpp"

#include <algorithm>

namespace casq::scheduler {

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2;
}

std::string suggest_queue(const std::vector<double>& durations, const QueueSet& queues, double factor) {
  if (durations.empty()) return queues.shortest().name;
  const double need = factor * median(durations);
  for (const auto& q : queues.all()) {
    if (q.time_limit_s >= need) return q.name;
  }
  return queues.longest().name;
}

std::string suggest_queue(std::string_view fingerprint, Store& store, double factor) {
  return suggest_queue(store.succeeded_durations(fingerprint), store.queues(), factor);
}

}  // namespace casq::scheduler

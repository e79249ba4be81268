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

#include <string>
#include <vector>

#include "casq/core/queue.hpp"
#include "casq/core/store.hpp"

namespace casq::scheduler {

inline constexpr double kDefaultSuggestFactor = 2.0;

double median(std::vector<double> values);

// Smallest queue whose limit is at least factor x the median duration;
// the longest queue if none is; the shortest when durations is empty.
std::string suggest_queue(const std::vector<double>& durations, const QueueSet& queues,
                          double factor = kDefaultSuggestFactor);

// Uses the SUCCEEDED jobs in the store that share the fingerprint.
std::string suggest_queue(std::string_view fingerprint, Store& store, double factor = kDefaultSuggestFactor);

}  // namespace casq::scheduler

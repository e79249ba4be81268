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

#include <cstddef>
#include <vector>

namespace casq::wheel {

inline constexpr std::size_t kDefaultBlockRows = 4096;
inline constexpr std::size_t kDefaultEntryPoints = 16;

// k block indices, the first at 0, spaced as evenly as integers allow:
// point i is ceil(i * B / k), which makes the largest cyclic gap
// ceil(B / k), the minimum possible. BadK unless 1 <= k <= B.
std::vector<std::size_t> plan_entry_points(std::size_t block_count, std::size_t k);

// min(16, B), and 1 for an empty table.
std::size_t default_entry_count(std::size_t block_count);

}  // namespace casq::wheel

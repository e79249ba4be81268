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

#include "casq/wheel/entry_points.hpp"

#include <algorithm>
#include <string>

#include "casq/core/error.hpp"

namespace casq::wheel {

std::vector<std::size_t> plan_entry_points(std::size_t block_count, std::size_t k) {
  if (k < 1 || k > block_count) {
    fail(ErrorCode::BadK, "entry point count " + std::to_string(k) + " must be in [1, " +
                              std::to_string(block_count) + "]");
  }
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back((i * block_count + k - 1) / k);
  return out;
}

std::size_t default_entry_count(std::size_t block_count) {
  return std::max<std::size_t>(1, std::min(kDefaultEntryPoints, block_count));
}

}  // namespace casq::wheel

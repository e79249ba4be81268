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

#include "casq/core/value.hpp"

namespace casq::mydb {

inline constexpr std::int64_t kRowOverheadBytes = 16;
inline constexpr std::int64_t kFixedCellBytes = 8;

// Bytes charged against the quota for one row: 8 per integer, float or
// date cell (null or not), the UTF-8 length of a string cell (0 when
// null), plus 16 per row. Values must already match the schema types.
std::int64_t row_bytes(const Schema& schema, const Row& row);

}  // namespace casq::mydb

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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "casq/core/value.hpp"

namespace casq {

// Idempotent libsodium initialization.
void init_crypto();

std::string sha256_hex(std::string_view bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);
// Returns an empty vector when the text is not valid hex.
std::vector<std::uint8_t> from_hex(std::string_view hex);

// Canonical, type-tagged encoding of one row.
std::string encode_row(const Row& row);

// Order-independent content hash of a set of rows: rows are encoded,
// sorted, and hashed together with the column names and types.
std::string content_hash(const Schema& schema, const std::vector<Row>& rows);

}  // namespace casq

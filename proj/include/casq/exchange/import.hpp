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
#include <string>
#include <string_view>

#include "casq/mydb/mydb.hpp"

namespace casq::exchange {

struct ImportResult {
  std::int64_t rows = 0;
  mydb::TableInfo table;
};

// Appends a CSV file to a table that already exists in the user's MyDB.
// The first record is a header naming the table's columns (any order,
// case-insensitive). Each field is converted to its column's type; any
// failure rejects the whole file and leaves the table unchanged.
//
// Errors: NoSuchTable, ArityMismatch (header or record width),
// TypeMismatch (names the row and column), QuotaExceeded, BadRequest.
ImportResult import_csv(mydb::MyDbManager& mydb, std::string_view user, std::string_view table,
                        std::string_view csv);

}  // namespace casq::exchange

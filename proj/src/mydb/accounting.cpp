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

#include "casq/mydb/accounting.hpp"

namespace casq::mydb {

std::int64_t row_bytes(const Schema& schema, const Row& row) {
  std::int64_t total = kRowOverheadBytes;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].type == ColumnType::String) {
      if (i < row.size()) {
        if (const auto* s = std::get_if<std::string>(&row[i])) total += static_cast<std::int64_t>(s->size());
      }
    } else {
      total += kFixedCellBytes;
    }
  }
  return total;
}

}  // namespace casq::mydb

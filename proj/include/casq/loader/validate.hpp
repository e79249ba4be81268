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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "casq/core/value.hpp"
#include "casq/loader/workflow.hpp"

namespace casq::loader {

struct Violation {
  RuleKind rule;
  std::string table;
  std::vector<std::int64_t> rows;  // 1-based row numbers in load order
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

struct TableData {
  Schema schema;
  std::vector<Row> rows;
};

// Resolves the referenced side of a foreign-key rule.
using TableLookup = std::function<std::optional<TableData>(const std::string& table)>;

// Applies the rules to one table. Unique keys with a NULL part are not
// compared. A key seen k times yields k-1 violations, each naming the
// first occurrence and the repeat. Unknown columns are reported as
// violations rather than thrown.
ValidationReport validate_table(const std::string& table, const TableData& data, const std::vector<Rule>& rules,
                                const TableLookup& lookup = {});

}  // namespace casq::loader

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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "casq/core/value.hpp"

namespace casq::loader {

enum class StageKind { Check, Load, Validate, Publish, Custom };

std::string_view stage_name(StageKind k);
std::optional<StageKind> parse_stage(std::string_view name);

// An input table: the CSV file it comes from and its column types.
struct TableDecl {
  std::string name;
  std::string file;  // matched against input file names
  Schema columns;
};

enum class RuleKind { Unique, NotNull, Range, ForeignKey };

std::string_view rule_name(RuleKind k);

struct Rule {
  RuleKind kind = RuleKind::Unique;
  std::vector<std::string> columns;  // Unique, NotNull, ForeignKey
  std::string column;                // Range
  std::optional<double> min;
  std::optional<double> max;
  std::string ref_table;  // ForeignKey
  std::vector<std::string> ref_columns;
};

// One stage. Undo is implied by the kind: CHECK and VALIDATE change
// nothing, LOAD drops its staging table, PUBLISH drops the table it created
// or deletes the rows it appended. CUSTOM carries explicit SQL for both.
struct NodeSpec {
  std::string id;
  StageKind kind = StageKind::Custom;
  std::set<std::string> deps;
  std::vector<std::string> tables;  // CHECK: tables to check (empty = all)
  std::string table;                // LOAD, VALIDATE, PUBLISH
  std::string publish_as;           // PUBLISH target name, default = table
  std::vector<Rule> rules;          // VALIDATE
  std::string sql;                  // CUSTOM, run against the staging area
  std::string undo_sql;
};

struct Workflow {
  std::string name;
  std::map<std::string, TableDecl> tables;
  std::vector<NodeSpec> nodes;     // declaration order
  std::vector<std::string> order;  // a topological order

  const NodeSpec& node(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;
};

// Checks ids, references and acyclicity and computes the order: among
// ready nodes the earliest declared goes first.
// Errors: BadRequest (duplicate ids, unknown tables, missing undo SQL),
// DanglingDependency, CycleDetected (the message lists one cycle).
Workflow define_workflow(std::string name, std::vector<TableDecl> tables, std::vector<NodeSpec> nodes);

// Parses a workflow descriptor (JSON) and defines it.
//
//   {"name": "...",
//    "tables": {"galaxies": {"file": "galaxies.csv",
//                            "columns": [{"name": "objid", "type": "integer"}, ...]}},
//    "nodes": [{"id": "check", "kind": "CHECK"},
//              {"id": "load", "kind": "LOAD", "deps": ["check"], "table": "galaxies"},
//              {"id": "validate", "kind": "VALIDATE", "deps": ["load"], "table": "galaxies",
//               "rules": [{"rule": "unique", "columns": ["objid"]},
//                         {"rule": "range", "column": "r", "min": 0, "max": 30}]},
//              {"id": "publish", "kind": "PUBLISH", "deps": ["validate"], "table": "galaxies",
//               "as": "rgal"}]}
Workflow parse_workflow(std::string_view json_text);

}  // namespace casq::loader

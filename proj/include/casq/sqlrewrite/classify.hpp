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

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace casq::sqlrewrite {

enum class Scope { MyDb, Group, Public };

// A logical table name. GROUP refs carry the publisher's user id as owner;
// MYDB refs bind to the requesting user when rewritten.
struct TableRef {
  Scope scope = Scope::Public;
  std::string owner;
  std::string table;

  // "MyDB.t", "GROUP.owner.t" or "t".
  std::string to_string() const;
  // Inverse of to_string (case-insensitive prefixes). MalformedPseudoName
  // on a bad pseudo name.
  static TableRef parse(std::string_view text);

  auto operator<=>(const TableRef&) const = default;
};

// table -> indexed columns, all lowercase.
using IndexCatalog = std::map<std::string, std::set<std::string>>;

struct QueryClass {
  std::optional<std::string> into_target;
  std::set<TableRef> refs;
  bool full_scan_candidate = false;
  std::string fingerprint;

  std::vector<std::string> public_tables() const;
};

// Lexical classification. Throws EmptyQuery, MalformedPseudoName, or
// QueryRejected (quoted identifiers, non-SELECT statements, batches,
// select-into a non-MyDB table).
//
// full_scan_candidate is a syntactic heuristic: the query reads a public
// table and no WHERE clause mentions a column the catalog lists as indexed
// for one of the public tables it reads.
QueryClass classify(std::string_view query, const IndexCatalog& indexed = {});

// Hash of the normalized token stream: identifiers lowercased, literals
// replaced by a placeholder, whitespace and comments dropped.
std::string fingerprint(std::string_view query);

}  // namespace casq::sqlrewrite

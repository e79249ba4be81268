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

#include <set>
#include <string>
#include <string_view>

namespace casq::sqlrewrite {

// What the rewriter needs to know about MyDB contents and sharing.
class NameCatalog {
 public:
  virtual ~NameCatalog() = default;
  virtual bool mydb_table_exists(const std::string& user, const std::string& table) const = 0;
  // True if requester may read owner's table through a group publication.
  virtual bool can_read(const std::string& requester, const std::string& owner,
                        const std::string& table) const = 0;
};

// Schema name under which a user's MyDB is attached: "mydb_<user>".
std::string physical_database(std::string_view user);

// Replaces MyDB.t with mydb_<requester>.t and GROUP.o.t with mydb_o.t.
// Every other byte of the query is left alone.
//
// Throws NoSuchTable for a missing MyDB table that is read (the INTO
// target may be new), AccessDenied for an unshared GROUP table or a
// physical name the requester may not read.
std::string rewrite(std::string_view query, const std::string& requester, const NameCatalog& catalog);

// Turns a rewritten query into what the execution backend runs: the INTO
// clause is removed and TOP n becomes LIMIT n at the end of its SELECT.
std::string prepare_for_backend(std::string_view query);

// Users whose MyDB a rewritten query touches (the <user> in mydb_<user>.x).
std::set<std::string> physical_databases(std::string_view query);

// Replaces each FROM/JOIN reference to the public table `table` with
// `replacement`, adding `AS <table>` when the reference had no alias so
// qualified column names keep working.
std::string retarget_table(std::string_view query, std::string_view table, std::string_view replacement);

}  // namespace casq::sqlrewrite

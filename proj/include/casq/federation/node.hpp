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
#include <vector>

#include <json.hpp>

#include "casq/core/store.hpp"
#include "casq/core/value.hpp"
#include "casq/federation/token.hpp"
#include "casq/mydb/groups.hpp"
#include "casq/mydb/mydb.hpp"

namespace casq::federation {

struct TableSummary {
  std::string name;
  std::int64_t rows = 0;
  std::int64_t bytes = 0;
};

struct JobSummary {
  JobId job_id = 0;
  std::string state;
  std::string queue;
};

// What one node holds for one user at a point in time.
struct SpaceSummary {
  std::string node_id;
  std::string user_id;
  std::int64_t at = 0;  // ms since epoch
  std::vector<TableSummary> tables;
  std::vector<JobSummary> jobs;
};

nlohmann::json to_json(const SpaceSummary& s);
SpaceSummary space_from_json(const nlohmann::json& j);

nlohmann::json schema_to_json(const Schema& s);
Schema schema_from_json(const nlohmann::json& j);  // BadRequest

// Header carrying the column types of a table sent as CSV.
inline constexpr const char* kSchemaHeader = "X-Casq-Schema";

// Checks the password at this (home) node and signs a token.
// AuthFailed on unknown users or wrong passwords.
Token login(Store& store, const NodeIdentity& node, std::string_view user, std::string_view password,
            std::int64_t ttl_seconds);

// The local account a verified principal acts as. Principals from
// trusted peers get an account on first use; authorization stays local.
std::string local_user(Store& store, const Principal& p);

SpaceSummary space_summary(const std::string& node_id, const std::string& user, Store& store,
                           mydb::MyDbManager& mydb);

struct TableDump {
  Schema schema;
  std::string csv;
  std::int64_t rows = 0;
};

// A table as CSV for a requester allowed to read it (own or published
// to an accepted group). AccessDenied or NoSuchTable otherwise.
TableDump dump_table(const std::string& requester, const std::string& owner, const std::string& table,
                     mydb::MyDbManager& mydb, mydb::Groups& groups);

// Materializes transferred CSV as a new MyDB table (all or nothing).
// TransferFailed when the bytes do not match the schema.
mydb::TableInfo materialize(mydb::MyDbManager& mydb, const std::string& user, const std::string& table,
                            const Schema& schema, std::string_view csv);

}  // namespace casq::federation

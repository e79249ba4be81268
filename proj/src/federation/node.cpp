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

#include "casq/federation/node.hpp"

#include <sstream>

#include "casq/core/error.hpp"
#include "casq/exchange/csv.hpp"

namespace casq::federation {

using nlohmann::json;

json to_json(const SpaceSummary& s) {
  json tables = json::array();
  for (const auto& t : s.tables) tables.push_back({{"name", t.name}, {"rows", t.rows}, {"bytes", t.bytes}});
  json jobs = json::array();
  for (const auto& j : s.jobs) jobs.push_back({{"job_id", j.job_id}, {"state", j.state}, {"queue", j.queue}});
  return {{"node_id", s.node_id}, {"user_id", s.user_id}, {"at", s.at}, {"tables", tables}, {"jobs", jobs}};
}

SpaceSummary space_from_json(const json& j) {
  try {
    SpaceSummary s;
    s.node_id = j.at("node_id").get<std::string>();
    s.user_id = j.at("user_id").get<std::string>();
    s.at = j.at("at").get<std::int64_t>();
    for (const auto& t : j.at("tables")) {
      s.tables.push_back({t.at("name").get<std::string>(), t.at("rows").get<std::int64_t>(),
                          t.at("bytes").get<std::int64_t>()});
    }
    for (const auto& x : j.at("jobs")) {
      s.jobs.push_back({x.at("job_id").get<JobId>(), x.at("state").get<std::string>(), x.at("queue").get<std::string>()});
    }
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::TransferFailed, std::string("bad space summary: ") + e.what());
  }
}

json schema_to_json(const Schema& s) {
  json out = json::array();
  for (const auto& c : s) out.push_back({{"name", c.name}, {"type", std::string(column_type_name(c.type))}});
  return out;
}

Schema schema_from_json(const json& j) {
  Schema s;
  try {
    for (const auto& c : j) {
      auto t = parse_column_type(c.at("type").get<std::string>());
      if (!t) fail(ErrorCode::BadRequest, "unknown column type " + c.at("type").get<std::string>());
      s.push_back({c.at("name").get<std::string>(), *t});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::BadRequest, std::string("bad schema: ") + e.what());
  }
  if (s.empty()) fail(ErrorCode::BadRequest, "schema has no columns");
  return s;
}

Token login(Store& store, const NodeIdentity& node, std::string_view user, std::string_view password,
            std::int64_t ttl_seconds) {
  std::string id;
  try {
    id = normalize_user_id(user);
  } catch (const Error&) {
    fail(ErrorCode::AuthFailed, "invalid user or password");
  }
  if (!store.verify_password(id, password)) fail(ErrorCode::AuthFailed, "invalid user or password");
  return issue_token(node, id, ttl_seconds, now_ms());
}

std::string local_user(Store& store, const Principal& p) { return store.ensure_user(p.user_id).user_id; }

SpaceSummary space_summary(const std::string& node_id, const std::string& user, Store& store,
                           mydb::MyDbManager& mydb) {
  SpaceSummary s;
  s.node_id = node_id;
  s.user_id = user;
  s.at = now_ms();
  for (const auto& [name, t] : mydb.info(user).tables) s.tables.push_back({name, t.row_count, t.byte_size});
  for (const auto& j : store.list_jobs(user)) {
    s.jobs.push_back({j.job_id, std::string(state_name(j.state)), j.queue});
  }
  return s;
}

TableDump dump_table(const std::string& requester, const std::string& owner, const std::string& table,
                     mydb::MyDbManager& mydb, mydb::Groups& groups) {
  if (!groups.check_access(requester, owner, table)) {
    if (requester == owner) fail(ErrorCode::NoSuchTable, "MyDB table '" + table + "' does not exist");
    fail(ErrorCode::AccessDenied, "no access to GROUP." + owner + "." + table);
  }
  TableDump d;
  std::ostringstream out;
  exchange::CsvWriter w(out);
  bool header = false;
  mydb.read_table(owner, table, 1024, [&](const Schema& s, const std::vector<Row>& rows) {
    if (!header) {
      d.schema = s;
      w.header(s);
      header = true;
    }
    for (const auto& r : rows) w.row(r);
    d.rows += static_cast<std::int64_t>(rows.size());
  });
  d.csv = out.str();
  return d;
}

mydb::TableInfo materialize(mydb::MyDbManager& mydb, const std::string& user, const std::string& table,
                            const Schema& schema, std::string_view csv) {
  std::vector<exchange::CsvRecord> recs;
  try {
    recs = exchange::parse_csv(csv);
  } catch (const Error& e) {
    fail(ErrorCode::TransferFailed, std::string("transferred data is not valid CSV: ") + e.what());
  }
  if (recs.empty() || recs.front().size() != schema.size()) {
    fail(ErrorCode::TransferFailed, "transferred data does not match its schema");
  }
  std::vector<Row> rows;
  for (std::size_t r = 1; r < recs.size(); ++r) {
    const auto& rec = recs[r];
    if (rec.size() == 1 && !rec[0] && schema.size() > 1) continue;
    if (rec.size() != schema.size()) fail(ErrorCode::TransferFailed, "row " + std::to_string(r) + " is truncated");
    Row row;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      auto v = exchange::convert_field(rec[i], schema[i].type);
      if (!v) fail(ErrorCode::TransferFailed, "row " + std::to_string(r) + " column " + schema[i].name + " is corrupt");
      row.push_back(std::move(*v));
    }
    rows.push_back(std::move(row));
  }
  return mydb.select_into(user, table, schema, rows);
}

}  // namespace casq::federation

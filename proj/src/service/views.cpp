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

#include "casq/service/views.hpp"

#include <cmath>

namespace casq::service {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const JobRecord& job) {
  json target = {{"kind", std::string(target_kind_name(job.target.kind))}};
  if (!job.target.table.empty()) target["table"] = job.target.table;
  if (!job.target.format.empty()) target["format"] = job.target.format;
  return {
      {"job_id", job.job_id},
      {"user_id", job.user_id},
      {"queue", job.queue},
      {"query", job.query_text},
      {"state", std::string(state_name(job.state))},
      {"target", std::move(target)},
      {"submitted_at", job.submitted_at},
      {"started_at", opt(job.started_at)},
      {"finished_at", opt(job.finished_at)},
      {"rows_produced", job.rows_produced},
      {"output_url", opt(job.output_url)},
      {"error", opt(job.error)},
      {"parent_job", opt(job.parent_job)},
      {"promotion_count", job.promotion_count},
      {"autocomplete", job.autocomplete},
      {"fingerprint", job.fingerprint},
      {"worker", job.worker},
  };
}

json to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Null>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(x)) return nullptr;
          return x;
        } else if constexpr (std::is_same_v<T, Date>) {
          return x.to_iso();
        } else {
          return x;
        }
      },
      v);
}

json to_json(const Schema& schema) {
  json out = json::array();
  for (const auto& c : schema) out.push_back({{"name", c.name}, {"type", std::string(column_type_name(c.type))}});
  return out;
}

json to_json(const mydb::TableInfo& t) {
  return {{"name", t.name},
          {"columns", to_json(t.columns)},
          {"rows", t.row_count},
          {"bytes", t.byte_size},
          {"created_at", t.created_at},
          {"published_to", t.published_to}};
}

json to_json(const mydb::Group& g) {
  json members = json::array();
  for (const auto& [user, status] : g.members) {
    members.push_back({{"user", user}, {"status", std::string(mydb::member_status_name(status))}});
  }
  return {{"group_id", g.group_id}, {"name", g.name}, {"owner", g.owner}, {"members", std::move(members)}};
}

json to_json(const wheel::WheelStats& s) {
  return {{"table", s.table},
          {"block_count", s.block_count},
          {"cursor", s.cursor},
          {"running", s.running},
          {"riders", s.riders},
          {"waiting", s.waiting},
          {"total_reads", s.total_reads},
          {"blocks_delivered", s.blocks_delivered},
          {"blocks_saved", s.blocks_saved},
          {"restarts", s.restarts}};
}

json to_json(const QueueSpec& q) {
  return {{"name", q.name},
          {"time_limit_s", q.time_limit_s},
          {"max_concurrency", q.max_concurrency},
          {"next_queue", opt(q.next_queue)},
          {"requires_mydb_target", q.requires_mydb_target}};
}

json to_json(const loader::StateDigest& d) {
  json entries = json::array();
  for (const auto& e : d.entries) {
    entries.push_back({{"area", e.area}, {"table", e.table}, {"rows", e.rows}, {"content_hash", e.content_hash}});
  }
  return {{"hash", d.hash()}, {"entries", std::move(entries)}};
}

json to_json(const loader::RunReport& r) {
  json nodes = json::array();
  for (const auto& n : r.nodes) {
    nodes.push_back({{"id", n.id},
                     {"kind", std::string(loader::stage_name(n.kind))},
                     {"state", std::string(loader::node_state_name(n.state))},
                     {"started_at", opt(n.started_at)},
                     {"finished_at", opt(n.finished_at)},
                     {"rows", n.rows},
                     {"findings", n.findings},
                     {"error", opt(n.error)}});
  }
  json events = json::array();
  for (const auto& e : r.events) {
    events.push_back({{"seq", e.seq}, {"at", e.at}, {"node", e.node}, {"type", std::string(loader::event_name(e.type))}});
  }
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"rule", std::string(loader::rule_name(v.rule))},
                          {"table", v.table},
                          {"rows", v.rows},
                          {"message", v.message}});
  }
  return {{"run_id", r.run_id},
          {"workflow", r.workflow},
          {"owner", r.owner},
          {"target", r.target},
          {"state", std::string(loader::run_state_name(r.state))},
          {"nodes", std::move(nodes)},
          {"completion_order", r.completion_order},
          {"undo_order", r.undo_order},
          {"events", std::move(events)},
          {"violations", std::move(violations)},
          {"digest_before", to_json(r.digest_before)},
          {"digest_after", r.digest_after ? to_json(*r.digest_after) : json(nullptr)},
          {"unwound", r.unwound},
          {"error", opt(r.error)}};
}

json to_json(const loader::UndoReport& r) {
  return {{"run_id", r.run_id},
          {"undone", r.undone},
          {"digest_before", to_json(r.digest_before)},
          {"digest_after", to_json(r.digest_after)},
          {"digest_matches", r.digest_matches}};
}

}  // namespace casq::service

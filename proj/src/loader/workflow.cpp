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

#include "casq/loader/workflow.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

#include "casq/core/error.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::loader {

using nlohmann::json;

std::string_view stage_name(StageKind k) {
  switch (k) {
    case StageKind::Check: return "CHECK";
    case StageKind::Load: return "LOAD";
    case StageKind::Validate: return "VALIDATE";
    case StageKind::Publish: return "PUBLISH";
    case StageKind::Custom: return "CUSTOM";
  }
  return "?";
}

std::optional<StageKind> parse_stage(std::string_view name) {
  const std::string n = sqlrewrite::to_lower(name);
  if (n == "check") return StageKind::Check;
  if (n == "load") return StageKind::Load;
  if (n == "validate") return StageKind::Validate;
  if (n == "publish") return StageKind::Publish;
  if (n == "custom") return StageKind::Custom;
  return std::nullopt;
}

std::string_view rule_name(RuleKind k) {
  switch (k) {
    case RuleKind::Unique: return "unique";
    case RuleKind::NotNull: return "not_null";
    case RuleKind::Range: return "range";
    case RuleKind::ForeignKey: return "foreign_key";
  }
  return "?";
}

const NodeSpec& Workflow::node(std::string_view id) const { return nodes[index_of(id)]; }

std::size_t Workflow::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  fail(ErrorCode::BadRequest, "no node '" + std::string(id) + "' in workflow " + name);
}

namespace {

// One cycle through the graph, as "a -> b -> a", or empty.
std::string find_cycle(const std::vector<NodeSpec>& nodes, const std::map<std::string, std::size_t>& index) {
  enum Color { White, Grey, Black };
  std::vector<Color> color(nodes.size(), White);
  std::vector<std::size_t> path;
  std::string found;
  std::function<bool(std::size_t)> dfs = [&](std::size_t v) {
    color[v] = Grey;
    path.push_back(v);
    for (const auto& d : nodes[v].deps) {
      const std::size_t u = index.at(d);
      if (color[u] == Grey) {
        auto it = std::find(path.begin(), path.end(), u);
        // path runs from dependents to dependencies; print in dependency direction
        std::vector<std::size_t> cyc(it, path.end());
        std::reverse(cyc.begin(), cyc.end());
        for (std::size_t k : cyc) found += nodes[k].id + " -> ";
        found += nodes[cyc.front()].id;
        return true;
      }
      if (color[u] == White && dfs(u)) return true;
    }
    path.pop_back();
    color[v] = Black;
    return false;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (color[i] == White && dfs(i)) break;
  }
  return found;
}

}  // namespace

Workflow define_workflow(std::string name, std::vector<TableDecl> tables, std::vector<NodeSpec> nodes) {
  Workflow wf;
  wf.name = std::move(name);
  for (auto& t : tables) {
    if (t.name.empty() || t.columns.empty()) fail(ErrorCode::BadRequest, "table declarations need a name and columns");
    t.name = sqlrewrite::to_lower(t.name);
    if (!wf.tables.emplace(t.name, t).second) fail(ErrorCode::BadRequest, "table '" + t.name + "' declared twice");
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id.empty()) fail(ErrorCode::BadRequest, "node without id");
    if (!index.emplace(nodes[i].id, i).second) fail(ErrorCode::BadRequest, "duplicate node id '" + nodes[i].id + "'");
  }
  auto need_table = [&](const NodeSpec& n, const std::string& t) {
    if (!wf.tables.count(t)) {
      fail(ErrorCode::BadRequest, "node '" + n.id + "' refers to undeclared table '" + t + "'");
    }
  };
  for (auto& n : nodes) {
    for (const auto& d : n.deps) {
      if (!index.count(d)) {
        fail(ErrorCode::DanglingDependency, "node '" + n.id + "' depends on unknown node '" + d + "'");
      }
    }
    n.table = sqlrewrite::to_lower(n.table);
    for (auto& t : n.tables) t = sqlrewrite::to_lower(t);
    switch (n.kind) {
      case StageKind::Check:
        for (const auto& t : n.tables) need_table(n, t);
        break;
      case StageKind::Load:
      case StageKind::Validate:
      case StageKind::Publish:
        need_table(n, n.table);
        break;
      case StageKind::Custom:
        if (n.sql.empty() || n.undo_sql.empty()) {
          fail(ErrorCode::BadRequest, "CUSTOM node '" + n.id + "' needs both sql and undo_sql");
        }
        break;
    }
    if (n.kind == StageKind::Publish && n.publish_as.empty()) n.publish_as = n.table;
  }
  const std::string cycle = find_cycle(nodes, index);
  if (!cycle.empty()) fail(ErrorCode::CycleDetected, "workflow has a cycle: " + cycle);

  // Kahn's algorithm, earliest declared ready node first.
  std::vector<std::size_t> missing(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) missing[i] = nodes[i].deps.size();
  std::vector<bool> placed(nodes.size(), false);
  while (wf.order.size() < nodes.size()) {
    std::size_t pick = nodes.size();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!placed[i] && missing[i] == 0) {
        pick = i;
        break;
      }
    }
    placed[pick] = true;
    wf.order.push_back(nodes[pick].id);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (nodes[j].deps.count(nodes[pick].id)) --missing[j];
    }
  }
  wf.nodes = std::move(nodes);
  return wf;
}

namespace {

std::vector<std::string> strings(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const json& v = j.at(key);
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
    return out;
  }
  for (const auto& s : v) out.push_back(s.get<std::string>());
  return out;
}

Rule parse_rule(const json& j) {
  Rule r;
  const std::string kind = sqlrewrite::to_lower(j.at("rule").get<std::string>());
  if (kind == "unique") r.kind = RuleKind::Unique;
  else if (kind == "not_null") r.kind = RuleKind::NotNull;
  else if (kind == "range") r.kind = RuleKind::Range;
  else if (kind == "foreign_key") r.kind = RuleKind::ForeignKey;
  else fail(ErrorCode::BadRequest, "unknown rule '" + kind + "'");
  r.columns = strings(j, "columns");
  if (j.contains("column")) r.column = j.at("column").get<std::string>();
  if (j.contains("min")) r.min = j.at("min").get<double>();
  if (j.contains("max")) r.max = j.at("max").get<double>();
  if (j.contains("references")) {
    const json& ref = j.at("references");
    r.ref_table = sqlrewrite::to_lower(ref.at("table").get<std::string>());
    r.ref_columns = strings(ref, "columns");
  }
  switch (r.kind) {
    case RuleKind::Unique:
    case RuleKind::NotNull:
      if (r.columns.empty()) fail(ErrorCode::BadRequest, kind + " rule needs columns");
      break;
    case RuleKind::Range:
      if (r.column.empty() || (!r.min && !r.max)) fail(ErrorCode::BadRequest, "range rule needs column and min or max");
      break;
    case RuleKind::ForeignKey:
      if (r.columns.empty() || r.ref_table.empty() || r.columns.size() != r.ref_columns.size()) {
        fail(ErrorCode::BadRequest, "foreign_key rule needs columns and matching references");
      }
      break;
  }
  return r;
}

}  // namespace

Workflow parse_workflow(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::BadRequest, std::string("workflow descriptor is not valid JSON: ") + e.what());
  }
  try {
    std::vector<TableDecl> tables;
    if (doc.contains("tables")) {
      for (const auto& [name, t] : doc.at("tables").items()) {
        TableDecl d;
        d.name = name;
        d.file = t.value("file", name + ".csv");
        for (const auto& c : t.at("columns")) {
          const std::string type = c.value("type", "string");
          auto ct = parse_column_type(type);
          if (!ct) fail(ErrorCode::BadRequest, "unknown column type '" + type + "'");
          d.columns.push_back({sqlrewrite::to_lower(c.at("name").get<std::string>()), *ct});
        }
        tables.push_back(std::move(d));
      }
    }
    std::vector<NodeSpec> nodes;
    for (const auto& n : doc.at("nodes")) {
      NodeSpec s;
      s.id = n.at("id").get<std::string>();
      const std::string kind = n.at("kind").get<std::string>();
      auto k = parse_stage(kind);
      if (!k) fail(ErrorCode::BadRequest, "unknown stage kind '" + kind + "'");
      s.kind = *k;
      for (const auto& d : strings(n, "deps")) s.deps.insert(d);
      s.tables = strings(n, "tables");
      s.table = n.value("table", "");
      s.publish_as = sqlrewrite::to_lower(n.value("as", ""));
      if (n.contains("rules")) {
        for (const auto& r : n.at("rules")) s.rules.push_back(parse_rule(r));
      }
      s.sql = n.value("sql", "");
      s.undo_sql = n.value("undo_sql", "");
      nodes.push_back(std::move(s));
    }
    return define_workflow(doc.value("name", "workflow"), std::move(tables), std::move(nodes));
  } catch (const json::exception& e) {
    fail(ErrorCode::BadRequest, std::string("bad workflow descriptor: ") + e.what());
  }
}

}  // namespace casq::loader

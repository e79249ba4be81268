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

#include <fstream>
#include <future>
#include <random>
#include <set>

#include "casq/loader/engine.hpp"
#include "casq/loader/validate.hpp"
#include "casq/loader/workflow.hpp"
#include "casq/mydb/mydb.hpp"
#include "doctest.h"
#include "error_of.hpp"
#include "temp_dir.hpp"

using namespace casq;
using namespace casq::loader;
using casq::testing::error_of;
using casq::testing::TempDir;

namespace {

NodeSpec node(std::string id, StageKind kind, std::set<std::string> deps = {}, std::string table = {}) {
  NodeSpec n;
  n.id = std::move(id);
  n.kind = kind;
  n.deps = std::move(deps);
  n.table = std::move(table);
  return n;
}

NodeSpec custom(std::string id, std::set<std::string> deps, std::string sql, std::string undo) {
  NodeSpec n = node(std::move(id), StageKind::Custom, std::move(deps));
  n.sql = std::move(sql);
  n.undo_sql = std::move(undo);
  return n;
}

const Schema kGalaxy = {{"objid", ColumnType::Integer}, {"r", ColumnType::Float}, {"seen", ColumnType::Date}};

TableDecl galaxies() { return {"galaxies", "galaxies.csv", kGalaxy}; }

Workflow four_stage(std::vector<Rule> rules = {{RuleKind::Unique, {"objid"}}}) {
  NodeSpec v = node("validate", StageKind::Validate, {"load"}, "galaxies");
  v.rules = std::move(rules);
  NodeSpec p = node("publish", StageKind::Publish, {"validate"}, "galaxies");
  p.publish_as = "rgal";
  return define_workflow("rgal", {galaxies()},
                         {node("check", StageKind::Check), node("load", StageKind::Load, {"check"}, "galaxies"),
                          std::move(v), std::move(p)});
}

std::filesystem::path write_csv(const TempDir& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string galaxy_csv(int n, int duplicate_of = -1) {
  std::string s = "objid,r,seen\n";
  for (int i = 0; i < n; ++i) {
    const int id = (duplicate_of >= 0 && i == n - 1) ? duplicate_of : i;
    s += std::to_string(id) + "," + std::to_string(15 + i % 10) + ".25,2004-02-0" + std::to_string(1 + i % 9) + "\n";
  }
  return s;
}

struct Env {
  TempDir dir;
  Store store{dir / "admin.db", QueueSet::defaults()};
  mydb::MyDbManager mydb{store, dir / "mydb"};
  LoaderEngine engine{dir / "staging.db"};
  std::shared_ptr<LoadTarget> target;

  Env() {
    store.create_user("alice");
    target = std::make_shared<MyDbLoadTarget>(mydb, "alice");
  }
};

// Independent duplicate finder: every pair (i, j), i < j, with equal keys
// where i is the first occurrence of that key.
std::set<std::pair<std::int64_t, std::int64_t>> brute_duplicates(const std::vector<std::int64_t>& keys) {
  std::set<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t j = 0; j < keys.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (keys[i] == keys[j]) {
        out.insert({static_cast<std::int64_t>(i + 1), static_cast<std::int64_t>(j + 1)});
        break;
      }
    }
  }
  return out;
}

void check_dependency_safety(const Workflow& wf, const RunReport& rep) {
  std::set<std::string> done;
  for (const auto& e : rep.events) {
    if (e.type == EventType::Started) {
      for (const auto& d : wf.node(e.node).deps) CHECK_MESSAGE(done.count(d), e.node << " started before " << d);
    }
    if (e.type == EventType::Done) done.insert(e.node);
  }
}

}  // namespace

TEST_CASE("workflow definition") {
  const auto wf = four_stage();
  CHECK(wf.order == std::vector<std::string>{"check", "load", "validate", "publish"});

  // Two branches joining at publish.
  const auto branches = define_workflow(
      "b", {},
      {custom("a1", {}, "SELECT 1", "SELECT 1"), custom("b1", {}, "SELECT 1", "SELECT 1"),
       custom("a2", {"a1"}, "SELECT 1", "SELECT 1"), custom("b2", {"b1"}, "SELECT 1", "SELECT 1"),
       custom("join", {"a2", "b2"}, "SELECT 1", "SELECT 1")});
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < branches.order.size(); ++i) pos[branches.order[i]] = i;
  for (const auto& n : branches.nodes) {
    for (const auto& d : n.deps) CHECK(pos[d] < pos[n.id]);
  }

  try {
    define_workflow("c", {}, {custom("a", {"b"}, "SELECT 1", "SELECT 1"), custom("b", {"a"}, "SELECT 1", "SELECT 1")});
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
    const std::string msg = e.what();
    CHECK((msg.find("a -> b -> a") != std::string::npos || msg.find("b -> a -> b") != std::string::npos));
  }
  CHECK(error_of([] { define_workflow("d", {}, {custom("a", {"zz"}, "SELECT 1", "SELECT 1")}); }) ==
        ErrorCode::DanglingDependency);
  CHECK(error_of([] { define_workflow("d", {}, {custom("a", {}, "SELECT 1", "")}); }) == ErrorCode::BadRequest);
  CHECK(error_of([] {
          define_workflow("d", {}, {custom("a", {}, "SELECT 1", "SELECT 1"), custom("a", {}, "SELECT 1", "SELECT 1")});
        }) == ErrorCode::BadRequest);
  CHECK(error_of([] { define_workflow("d", {}, {node("l", StageKind::Load, {}, "nope")}); }) == ErrorCode::BadRequest);
}

TEST_CASE("workflow descriptor") {
  const auto wf = parse_workflow(R"({
    "name": "rgal",
    "tables": {"galaxies": {"file": "galaxies.csv",
                            "columns": [{"name": "objid", "type": "integer"}, {"name": "r", "type": "float"},
                                        {"name": "seen", "type": "date"}]}},
    "nodes": [{"id": "check", "kind": "CHECK"},
              {"id": "load", "kind": "LOAD", "deps": ["check"], "table": "galaxies"},
              {"id": "validate", "kind": "VALIDATE", "deps": ["load"], "table": "galaxies",
               "rules": [{"rule": "unique", "columns": ["objid"]},
                         {"rule": "range", "column": "r", "min": 0, "max": 30}]},
              {"id": "publish", "kind": "PUBLISH", "deps": ["validate"], "table": "galaxies", "as": "rgal"}]})");
  CHECK(wf.order.size() == 4);
  CHECK(wf.tables.at("galaxies").columns == kGalaxy);
  CHECK(wf.node("validate").rules.size() == 2);
  CHECK(wf.node("publish").publish_as == "rgal");
  CHECK(error_of([] { parse_workflow("{"); }) == ErrorCode::BadRequest);
  CHECK(error_of([] { parse_workflow(R"({"nodes": [{"id": "a", "kind": "DANCE"}]})"); }) == ErrorCode::BadRequest);
  CHECK(error_of([] {
          parse_workflow(R"({"nodes": [{"id": "a", "kind": "CUSTOM", "sql": "x", "undo_sql": "y", "deps": ["a"]}]})");
        }) == ErrorCode::CycleDetected);
}

TEST_CASE("validation rules") {
  TableData t;
  t.schema = {{"id", ColumnType::Integer}, {"ref", ColumnType::Integer}, {"mag", ColumnType::Float}};
  for (int i = 0; i < 100; ++i) t.rows.push_back({std::int64_t{i}, std::int64_t{i % 10}, 20.0});
  CHECK(validate_table("t", t, {{RuleKind::Unique, {"id"}}}).ok());

  t.rows[73][0] = std::int64_t{12};
  auto rep = validate_table("t", t, {{RuleKind::Unique, {"id"}}});
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].rows == std::vector<std::int64_t>{13, 74});

  TableData parent;
  parent.schema = {{"pid", ColumnType::Integer}};
  for (int i = 0; i < 10; ++i) parent.rows.push_back({std::int64_t{i}});
  auto lookup = [&](const std::string& name) -> std::optional<TableData> {
    if (name == "parent") return parent;
    return std::nullopt;
  };
  Rule fk{RuleKind::ForeignKey, {"ref"}, {}, {}, {}, "parent", {"pid"}};
  CHECK(validate_table("t", t, {fk}, lookup).ok());
  t.rows[5][1] = std::int64_t{99};
  rep = validate_table("t", t, {fk}, lookup);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].rows == std::vector<std::int64_t>{6});

  t.rows[7][2] = Null{};
  t.rows[8][2] = 40.0;
  Rule range{RuleKind::Range, {}, "mag", 0.0, 30.0};
  rep = validate_table("t", t, {{RuleKind::NotNull, {"mag"}}, range});
  REQUIRE(rep.violations.size() == 2);
  CHECK(rep.violations[0].rule == RuleKind::NotNull);
  CHECK(rep.violations[0].rows == std::vector<std::int64_t>{8});
  CHECK(rep.violations[1].rule == RuleKind::Range);
  CHECK(rep.violations[1].rows == std::vector<std::int64_t>{9});

  CHECK(!validate_table("t", t, {{RuleKind::Unique, {"nope"}}}).ok());
}

TEST_CASE("unique and foreign-key rules agree with brute force") {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 100; ++round) {
    const int n = std::uniform_int_distribution<int>(0, 60)(rng);
    const int span = std::uniform_int_distribution<int>(1, 80)(rng);
    TableData t;
    t.schema = {{"k", ColumnType::Integer}};
    std::vector<std::int64_t> keys;
    for (int i = 0; i < n; ++i) {
      keys.push_back(std::uniform_int_distribution<std::int64_t>(0, span)(rng));
      t.rows.push_back({keys.back()});
    }
    const auto rep = validate_table("t", t, {{RuleKind::Unique, {"k"}}});
    std::set<std::pair<std::int64_t, std::int64_t>> got;
    for (const auto& v : rep.violations) {
      REQUIRE(v.rows.size() == 2);
      got.insert({v.rows[0], v.rows[1]});
    }
    CHECK(got == brute_duplicates(keys));
    CHECK(rep.violations.size() == got.size());

    TableData parent;
    parent.schema = {{"p", ColumnType::Integer}};
    std::set<std::int64_t> parents;
    for (int i = 0; i < span / 2; ++i) {
      const auto p = std::uniform_int_distribution<std::int64_t>(0, span)(rng);
      parents.insert(p);
      parent.rows.push_back({p});
    }
    std::vector<std::int64_t> orphans;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (!parents.count(keys[i])) orphans.push_back(static_cast<std::int64_t>(i + 1));
    }
    const auto fk = validate_table("t", t, {{RuleKind::ForeignKey, {"k"}, {}, {}, {}, "p", {"p"}}},
                                   [&](const std::string&) { return std::optional<TableData>(parent); });
    std::vector<std::int64_t> got_orphans;
    for (const auto& v : fk.violations) got_orphans.push_back(v.rows.at(0));
    CHECK(got_orphans == orphans);
  }
}

TEST_CASE("clean load publishes into MyDB") {
  Env env;
  const auto wf = four_stage();
  const auto file = write_csv(env.dir, "galaxies.csv", galaxy_csv(100));
  const auto rep = env.engine.run(wf, {file}, env.target);
  CHECK(rep.state == RunState::Succeeded);
  for (const auto& n : rep.nodes) CHECK(n.state == NodeState::Done);
  CHECK(rep.completion_order == wf.order);
  const auto t = env.mydb.get_table("alice", "rgal");
  CHECK(t.row_count == 100);
  CHECK(t.columns == kGalaxy);
  check_dependency_safety(wf, rep);
}

TEST_CASE("validation failure unwinds in reverse") {
  Env env;
  env.mydb.select_into("alice", "keep", {{"x", ColumnType::Integer}}, {{std::int64_t{1}}});
  const auto before = env.engine.digest(*env.target);
  const auto wf = four_stage();
  const auto file = write_csv(env.dir, "galaxies.csv", galaxy_csv(100, 42));
  const auto rep = env.engine.run(wf, {file}, env.target);
  CHECK(rep.state == RunState::Failed);
  CHECK(rep.node("publish").state == NodeState::Pending);
  CHECK(rep.node("validate").state == NodeState::Failed);
  CHECK(rep.node("load").state == NodeState::Undone);
  CHECK(rep.node("check").state == NodeState::Undone);
  CHECK(rep.undo_order == std::vector<std::string>{"load", "check"});
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].rows == std::vector<std::int64_t>{43, 100});
  CHECK(rep.unwound);
  REQUIRE(rep.digest_after.has_value());
  CHECK(*rep.digest_after == rep.digest_before);
  CHECK(env.engine.digest(*env.target) == before);
  CHECK(!env.mydb.table_exists("alice", "rgal"));
  for (const auto& e : rep.events) CHECK(e.node != "publish");
  CHECK(error_of([&] { env.engine.cancel(rep.run_id); }) == ErrorCode::AlreadyUnwound);
}

TEST_CASE("empty input set fails the check") {
  Env env;
  const auto rep = env.engine.run(four_stage(), {}, env.target);
  CHECK(rep.state == RunState::Failed);
  CHECK(rep.node("check").state == NodeState::Failed);
  REQUIRE(!rep.node("check").findings.empty());
  CHECK(rep.node("check").findings[0] == "no input files");
  CHECK(rep.undo_order.empty());

  const auto bad = write_csv(env.dir, "galaxies.csv", "objid,r,seen\n1,abc,2004-02-01\n");
  const auto rep2 = env.engine.run(four_stage(), {bad}, env.target);
  CHECK(rep2.node("check").state == NodeState::Failed);
  CHECK(rep2.node("check").findings.at(0).find("row 1 column r") != std::string::npos);
}

TEST_CASE("cancel after load") {
  Env env;
  const auto wf = four_stage();
  const auto file = write_csv(env.dir, "galaxies.csv", galaxy_csv(50));
  const auto before = env.engine.digest(*env.target);
  RunOptions opts;
  std::promise<RunId> id_promise;
  auto id_future = id_promise.get_future().share();
  std::promise<void> requested;
  opts.on_node_done = [&](const std::string& node, std::size_t) {
    if (node == "load") {
      env.engine.request_cancel(id_future.get());
      requested.set_value();
    }
  };
  const RunId id = env.engine.start(wf, {file}, env.target, opts);
  id_promise.set_value(id);
  requested.get_future().wait();
  const auto undo = env.engine.cancel(id);
  CHECK(undo.undone == std::vector<std::string>{"load", "check"});
  CHECK(undo.digest_matches);
  CHECK(undo.digest_after == before);
  const auto rep = env.engine.report(id);
  CHECK(rep.state == RunState::Cancelled);
  CHECK(rep.node("validate").state == NodeState::Pending);
  // Staging tables are gone.
  sqlite::Database staging(env.dir / "staging.db");
  CHECK(sqlite_user_tables(staging).empty());
  CHECK(error_of([&] { env.engine.cancel(id); }) == ErrorCode::AlreadyUnwound);
  CHECK(error_of([&] { env.engine.cancel(999); }) == ErrorCode::UnknownRun);
}

TEST_CASE("cancel before anything ran") {
  Env env;
  const auto file = write_csv(env.dir, "galaxies.csv", galaxy_csv(5));
  // The first run holds the engine until released; the second waits.
  std::promise<void> release;
  auto gate = release.get_future().share();
  RunOptions hold;
  hold.on_node_done = [&](const std::string& node, std::size_t) {
    if (node == "check") gate.wait();
  };
  const RunId first = env.engine.start(four_stage(), {file}, env.target, hold);
  const RunId second = env.engine.start(four_stage(), {file}, env.target);
  std::thread releaser([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    release.set_value();
  });
  // cancel() of the queued run waits for its turn, then finds nothing to undo.
  const auto undo = env.engine.cancel(second);
  releaser.join();
  CHECK(undo.undone.empty());
  CHECK(undo.digest_matches);
  CHECK(env.engine.wait(first).state == RunState::Succeeded);
  CHECK(env.engine.report(second).state == RunState::Cancelled);
}

TEST_CASE("cancelling a finished run rolls it back") {
  Env env;
  // rgal already exists: the publish appends and undo removes exactly
  // the appended rows.
  env.mydb.select_into("alice", "rgal", kGalaxy, {{std::int64_t{-1}, 1.0, Null{}}});
  const auto before = env.engine.digest(*env.target);
  const auto file = write_csv(env.dir, "galaxies.csv", galaxy_csv(30));
  const auto rep = env.engine.run(four_stage(), {file}, env.target);
  REQUIRE(rep.state == RunState::Succeeded);
  CHECK(env.mydb.get_table("alice", "rgal").row_count == 31);
  const auto undo = env.engine.cancel(rep.run_id);
  CHECK(undo.undone == std::vector<std::string>{"publish", "validate", "load", "check"});
  CHECK(undo.digest_matches);
  CHECK(env.engine.digest(*env.target) == before);
  const auto t = env.mydb.get_table("alice", "rgal");
  CHECK(t.row_count == 1);
  CHECK(t.byte_size == env.mydb.recompute_sizes("alice").at("rgal"));
}

TEST_CASE("parallel branches and a public database target") {
  TempDir dir;
  LoaderEngine engine(dir / "staging.db", 2);
  auto target = std::make_shared<DatabaseLoadTarget>(dir / "catalog.db");
  const Schema fields = {{"fieldid", ColumnType::Integer}};
  const Schema objs = {{"objid", ColumnType::Integer}, {"fieldid", ColumnType::Integer}};
  NodeSpec check = node("check", StageKind::Check);
  NodeSpec lf = node("load_fields", StageKind::Load, {"check"}, "fields");
  NodeSpec lo = node("load_objs", StageKind::Load, {"check"}, "objs");
  NodeSpec v = node("validate_objs", StageKind::Validate, {"load_fields", "load_objs"}, "objs");
  v.rules = {{RuleKind::Unique, {"objid"}}, {RuleKind::ForeignKey, {"fieldid"}, {}, {}, {}, "fields", {"fieldid"}}};
  NodeSpec pf = node("publish_fields", StageKind::Publish, {"validate_objs"}, "fields");
  NodeSpec po = node("publish_objs", StageKind::Publish, {"validate_objs"}, "objs");
  const auto wf = define_workflow("sky", {{"fields", "fields.csv", fields}, {"objs", "objs.csv", objs}},
                                  {check, lf, lo, v, pf, po});
  std::string f = "fieldid\n", o = "objid,fieldid\n";
  for (int i = 0; i < 5; ++i) f += std::to_string(i) + "\n";
  for (int i = 0; i < 40; ++i) o += std::to_string(i) + "," + std::to_string(i % 5) + "\n";
  const auto rep = engine.run(wf, {write_csv(dir, "fields.csv", f), write_csv(dir, "objs.csv", o)}, target);
  CHECK(rep.state == RunState::Succeeded);
  check_dependency_safety(wf, rep);
  // Never more than `width` nodes in flight.
  int in_flight = 0, peak = 0;
  for (const auto& e : rep.events) {
    if (e.type == EventType::Started) peak = std::max(peak, ++in_flight);
    if (e.type == EventType::Done || e.type == EventType::Failed) --in_flight;
  }
  CHECK(peak <= 2);
  CHECK(target->tables() == std::vector<std::string>{"fields", "objs"});

  // An orphan reference fails validation; nothing reaches the catalog.
  const auto before = engine.digest(*target);
  o += "99,42\n";
  const auto bad = engine.run(wf, {write_csv(dir, "fields.csv", f), write_csv(dir, "objs.csv", o)}, target);
  CHECK(bad.state == RunState::Failed);
  CHECK(bad.violations.size() == 1);
  CHECK(*bad.digest_after == bad.digest_before);
  CHECK(engine.digest(*target) == before);
  check_dependency_safety(wf, bad);
  std::vector<std::string> reversed(bad.completion_order.rbegin(), bad.completion_order.rend());
  CHECK(bad.undo_order == reversed);
}

TEST_CASE("custom nodes run their undo SQL") {
  TempDir dir;
  LoaderEngine engine(dir / "staging.db");
  auto target = std::make_shared<DatabaseLoadTarget>(dir / "catalog.db");
  const auto wf = define_workflow(
      "c", {},
      {custom("make", {}, "CREATE TABLE {staging}scratch (x INTEGER); INSERT INTO {staging}scratch VALUES (1)",
              "DROP TABLE {staging}scratch"),
       custom("boom", {"make"}, "SELECT * FROM missing_table", "SELECT 1")});
  const auto rep = engine.run(wf, {}, target);
  CHECK(rep.state == RunState::Failed);
  CHECK(rep.node("boom").error.has_value());
  CHECK(rep.undo_order == std::vector<std::string>{"make"});
  CHECK(*rep.digest_after == rep.digest_before);
}

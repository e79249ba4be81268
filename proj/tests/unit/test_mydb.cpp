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

#include <random>
#include <thread>

#include "casq/mydb/accounting.hpp"
#include "casq/mydb/groups.hpp"
#include "casq/mydb/mydb.hpp"
#include "casq/sqlrewrite/rewrite.hpp"
#include "doctest.h"
#include "error_of.hpp"
#include "temp_dir.hpp"

using namespace casq;
using namespace casq::mydb;
using casq::testing::error_of;
using casq::testing::TempDir;

namespace {

struct Env {
  TempDir dir;
  Store store{dir / "admin.db", QueueSet::defaults()};
  MyDbManager mydb{store, dir / "mydb"};
  Groups groups{store, mydb};

  Env() {
    for (const char* u : {"alice", "bob", "carol", "cosmology"}) store.create_user(u);
  }
};

const Schema kSchema = {{"objid", ColumnType::Integer},
                        {"r", ColumnType::Float},
                        {"name", ColumnType::String},
                        {"seen", ColumnType::Date}};

Row make_row(std::int64_t i, const std::string& name) {
  return {i, 20.0 + static_cast<double>(i) / 10, name, *Date::parse_iso("2004-02-01")};
}

// Independent statement of the accounting rule for kSchema rows.
std::int64_t oracle_bytes(const std::vector<Row>& rows) {
  std::int64_t total = 0;
  for (const auto& r : rows) {
    total += 16 + 8 + 8 + 8;
    if (auto* s = std::get_if<std::string>(&r[2])) total += static_cast<std::int64_t>(s->size());
  }
  return total;
}

}  // namespace

TEST_CASE("ensure_mydb") {
  Env env;
  const auto info = env.mydb.ensure_mydb("alice");
  CHECK(info.quota_bytes == 104857600);
  CHECK(info.used_bytes == 0);
  CHECK(info.tables.empty());
  CHECK(info.physical_name == "mydb_alice");
  CHECK(env.store.get_user("alice").mydb_created);
  const auto again = env.mydb.ensure_mydb("alice");
  CHECK(again.physical_name == info.physical_name);
  CHECK(again.used_bytes == 0);
  CHECK(error_of([&] { env.mydb.ensure_mydb("nobody"); }) == ErrorCode::UnknownUser);
}

TEST_CASE("select_into and drop") {
  Env env;
  std::vector<Row> rows;
  for (int i = 0; i < 10; ++i) rows.push_back(make_row(i, "gal" + std::to_string(i)));
  rows[3][2] = Null{};
  rows[4][1] = Null{};
  const auto t = env.mydb.select_into("alice", "rgal", kSchema, rows);
  CHECK(t.row_count == 10);
  CHECK(t.byte_size == oracle_bytes(rows));
  CHECK(env.mydb.info("alice").used_bytes == t.byte_size);
  CHECK(error_of([&] { env.mydb.select_into("alice", "RGAL", kSchema, rows); }) == ErrorCode::TableExists);

  std::vector<Row> back;
  env.mydb.read_table("alice", "rgal", 3, [&](const Schema& s, const std::vector<Row>& b) {
    CHECK(s == kSchema);
    back.insert(back.end(), b.begin(), b.end());
  });
  CHECK(back == rows);

  CHECK(env.mydb.drop_table("alice", "rgal") == t.byte_size);
  CHECK(env.mydb.info("alice").used_bytes == 0);
  CHECK(error_of([&] { env.mydb.drop_table("alice", "rgal"); }) == ErrorCode::NoSuchTable);
}

TEST_CASE("writer coercion and column names") {
  Env env;
  auto w = env.mydb.create_table("alice", "t", {{"a", ColumnType::Float}, {"A", ColumnType::String}});
  CHECK(w.schema()[1].name == "a_2");
  w.append({{std::int64_t{3}, std::int64_t{4}}});
  CHECK(w.commit().row_count == 1);
  auto w2 = env.mydb.create_table("alice", "u", {{"d", ColumnType::Date}});
  CHECK(error_of([&] { w2.append({{std::string("not a date")}}); }) == ErrorCode::TypeMismatch);
  CHECK_FALSE(env.mydb.table_exists("alice", "u"));
  CHECK(error_of([&] { env.mydb.select_into("alice", "v", {{"x", ColumnType::Integer}}, {{1, 2}}); }) ==
        ErrorCode::ArityMismatch);
  CHECK(error_of([&] { env.mydb.create_table("alice", "_casq_tables", kSchema); }) == ErrorCode::BadRequest);
  CHECK(error_of([&] { env.mydb.create_table("alice", "x;drop", kSchema); }) == ErrorCode::BadRequest);
}

TEST_CASE("quota breach rolls back the whole table") {
  Env env;
  env.store.set_quota("alice", 10000);
  const auto small = env.mydb.select_into("alice", "keep", kSchema, {make_row(1, "x")});
  const auto before = env.mydb.info("alice");

  // Grow batches until the rule says the next one crosses the quota.
  auto w = env.mydb.create_table("alice", "big", kSchema);
  std::vector<Row> sent;
  ErrorCode got = ErrorCode::NotFound;
  for (int b = 0; b < 1000; ++b) {
    std::vector<Row> batch;
    for (int i = 0; i < 5; ++i) batch.push_back(make_row(b * 5 + i, std::string(50, 'z')));
    sent.insert(sent.end(), batch.begin(), batch.end());
    const bool should_fail = before.used_bytes + oracle_bytes(sent) > 10000;
    try {
      w.append(batch);
      REQUIRE_FALSE(should_fail);
    } catch (const Error& e) {
      REQUIRE(should_fail);
      got = e.code();
      break;
    }
  }
  CHECK(got == ErrorCode::QuotaExceeded);
  const auto after = env.mydb.info("alice");
  CHECK(after.used_bytes == before.used_bytes);
  CHECK(after.tables.size() == 1);
  CHECK(after.tables.count("big") == 0);
  CHECK(after.tables.at("keep").byte_size == small.byte_size);
}

TEST_CASE("quota conservation over random operation sequences") {
  Env env;
  std::mt19937 rng(5);
  env.store.set_quota("bob", 20000);
  std::map<std::string, std::int64_t> live;
  for (int step = 0; step < 150; ++step) {
    const std::string name = "t" + std::to_string(rng() % 6);
    if (rng() % 3 == 0 && live.count(name)) {
      CHECK(env.mydb.drop_table("bob", name) == live[name]);
      live.erase(name);
    } else {
      std::vector<Row> rows;
      for (unsigned i = rng() % 40; i > 0; --i) rows.push_back(make_row(i, std::string(rng() % 30, 'q')));
      try {
        auto t = env.mydb.select_into("bob", name, kSchema, rows);
        REQUIRE(live.count(name) == 0);
        live[name] = t.byte_size;
      } catch (const Error& e) {
        REQUIRE((e.code() == ErrorCode::TableExists || e.code() == ErrorCode::QuotaExceeded));
      }
    }
    const auto info = env.mydb.info("bob");
    std::int64_t sum = 0;
    for (auto& [n, b] : live) sum += b;
    REQUIRE(info.used_bytes == sum);
    REQUIRE(info.used_bytes <= info.quota_bytes);
    REQUIRE(info.tables.size() == live.size());
  }
  const auto sizes = env.mydb.recompute_sizes("bob");
  for (auto& [n, b] : live) CHECK(sizes.at(n) == b);
}

TEST_CASE("writers for one user serialize") {
  Env env;
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      std::vector<Row> rows;
      for (int i = 0; i < 200; ++i) rows.push_back(make_row(i, "w"));
      env.mydb.select_into("alice", "w" + std::to_string(t), kSchema, rows);
      ++ok;
    });
  }
  for (auto& th : threads) th.join();
  CHECK(ok == 4);
  CHECK(env.mydb.info("alice").tables.size() == 4);
}

TEST_CASE("groups and publication") {
  Env env;
  auto g = env.groups.create_group("cosmology", "cosmology");
  CHECK(g.members.size() == 1);
  CHECK(g.members.at("cosmology") == MemberStatus::Accepted);
  CHECK(error_of([&] { env.groups.create_group("alice", "cosmology"); }) == ErrorCode::DuplicateGroup);

  CHECK(env.groups.invite(g.group_id, "cosmology", "bob").members.at("bob") == MemberStatus::Invited);
  CHECK(error_of([&] { env.groups.invite(g.group_id, "bob", "carol"); }) == ErrorCode::NotOwner);
  CHECK(error_of([&] { env.groups.invite(g.group_id, "cosmology", "bob"); }) == ErrorCode::AlreadyMember);
  CHECK(error_of([&] { env.groups.accept(g.group_id, "carol"); }) == ErrorCode::NotInvited);
  CHECK(error_of([&] { env.groups.invite(99, "cosmology", "bob"); }) == ErrorCode::UnknownGroup);

  env.mydb.select_into("cosmology", "rgal", kSchema, {make_row(1, "a")});
  env.mydb.select_into("bob", "mine", kSchema, {make_row(1, "a")});
  CHECK(error_of([&] { env.groups.publish("bob", "mine", g.group_id); }) == ErrorCode::NotMember);
  CHECK(error_of([&] { env.groups.publish("cosmology", "nope", g.group_id); }) == ErrorCode::NoSuchTable);
  CHECK(env.groups.publish("cosmology", "rgal", g.group_id).published_to == std::set<std::int64_t>{g.group_id});

  CHECK_FALSE(env.groups.check_access("bob", "cosmology", "rgal"));  // only invited
  CHECK(env.groups.accept(g.group_id, "bob").members.at("bob") == MemberStatus::Accepted);
  CHECK(error_of([&] { env.groups.accept(g.group_id, "bob"); }) == ErrorCode::NotInvited);
  CHECK(env.groups.check_access("bob", "cosmology", "rgal"));
  CHECK_FALSE(env.groups.check_access("carol", "cosmology", "rgal"));
  CHECK(env.groups.check_access("bob", "bob", "mine"));

  MyDbCatalog catalog(env.mydb, env.groups);
  const std::string q = "select * from GROUP.cosmology.rgal";
  CHECK(sqlrewrite::rewrite(q, "bob", catalog) == "select * from mydb_cosmology.rgal");
  CHECK(error_of([&] { sqlrewrite::rewrite(q, "carol", catalog); }) == ErrorCode::AccessDenied);

  env.mydb.drop_table("cosmology", "rgal");
  CHECK(error_of([&] { sqlrewrite::rewrite(q, "bob", catalog); }) == ErrorCode::AccessDenied);
  CHECK(env.groups.publications("cosmology", "rgal").empty());
  // A new table with the old name is not shared.
  env.mydb.select_into("cosmology", "rgal", kSchema, {make_row(1, "a")});
  CHECK_FALSE(env.groups.check_access("bob", "cosmology", "rgal"));
  CHECK(env.groups.groups_of("bob").size() == 1);
}

TEST_CASE("access matches a brute-force oracle over membership lattices") {
  // owner u0 is accepted in both groups; u1 and u2 take every status in
  // each group; the table is published to every subset of the groups.
  enum S { None, Invited, Accepted };
  int checked = 0;
  for (int code = 0; code < 81; ++code) {
    S status[3][2] = {{Accepted, Accepted}};
    int c = code;
    for (int u = 1; u < 3; ++u) {
      for (int gi = 0; gi < 2; ++gi) {
        status[u][gi] = static_cast<S>(c % 3);
        c /= 3;
      }
    }
    for (int pub = 0; pub < 4; ++pub) {
      TempDir dir;
      Store store(dir / "admin.db", QueueSet::defaults());
      MyDbManager mydb(store, dir / "m");
      Groups groups(store, mydb);
      for (const char* u : {"adm", "u0", "u1", "u2"}) store.create_user(u);
      std::int64_t gid[2];
      for (int gi = 0; gi < 2; ++gi) {
        gid[gi] = groups.create_group("adm", "g" + std::to_string(gi)).group_id;
        for (int u = 0; u < 3; ++u) {
          const std::string name = "u" + std::to_string(u);
          if (status[u][gi] != None) groups.invite(gid[gi], "adm", name);
          if (status[u][gi] == Accepted) groups.accept(gid[gi], name);
        }
      }
      mydb.select_into("u0", "t", kSchema, {make_row(1, "a")});
      for (int gi = 0; gi < 2; ++gi) {
        if (pub & (1 << gi)) groups.publish("u0", "t", gid[gi]);
      }
      for (int r = 0; r < 3; ++r) {
        bool expect = r == 0;
        for (int gi = 0; gi < 2; ++gi) expect = expect || ((pub & (1 << gi)) && status[r][gi] == Accepted);
        REQUIRE(groups.check_access("u" + std::to_string(r), "u0", "t") == expect);
        ++checked;
      }
    }
  }
  CHECK(checked == 81 * 4 * 3);
}

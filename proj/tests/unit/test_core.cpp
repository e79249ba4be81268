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

#include <algorithm>
#include <atomic>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "casq/core/digest.hpp"
#include "casq/core/error.hpp"
#include "casq/core/store.hpp"
#include "doctest.h"
#include "temp_dir.hpp"

using namespace casq;
using casq::testing::TempDir;

namespace {

template <typename Fn>
ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::NotFound;
}

struct Fixture {
  TempDir dir;
  Store store{dir / "admin.db", QueueSet::defaults()};

  Fixture() {
    store.create_user("alice");
    store.create_user("bob");
  }

  JobRecord submit_short(const std::string& user, const std::string& q = "select 1") {
    return store.create_job({user, q, "short", JobTarget::return_rows()});
  }
};

}  // namespace

TEST_CASE("create_job") {
  Fixture f;
  SUBCASE("long-queue select-into with MyDB target") {
    auto r = f.store.create_job({"alice",
                                 "select top 10 * into MyDB.rgal from galaxy where r < 22 and r >21",
                                 "long", JobTarget::into_mydb("rgal")});
    CHECK(r.state == JobState::Submitted);
    CHECK(r.job_id > 0);
    CHECK(r.target == JobTarget::into_mydb("rgal"));
    CHECK(r.submitted_at > 0);
    CHECK_FALSE(r.started_at);
  }
  SUBCASE("minimal short job") {
    auto r = f.submit_short("alice");
    CHECK(r.state == JobState::Submitted);
    CHECK(r.queue == "short");
  }
  SUBCASE("long queue without MyDB target") {
    CHECK(error_of([&] {
            f.store.create_job({"alice", "select * from galaxy", "long", JobTarget::return_rows()});
          }) == ErrorCode::TargetRequired);
  }
  SUBCASE("unknown user and queue") {
    CHECK(error_of([&] { f.submit_short("mallory"); }) == ErrorCode::UnknownUser);
    CHECK(error_of([&] {
            f.store.create_job({"alice", "select 1", "medium", JobTarget::return_rows()});
          }) == ErrorCode::UnknownQueue);
  }
  SUBCASE("autocomplete into a MyDB-only successor needs a MyDB target") {
    NewJob j{"alice", "select 1", "short", JobTarget::return_rows()};
    j.autocomplete = true;
    CHECK(error_of([&] { f.store.create_job(j); }) == ErrorCode::TargetRequired);
    j.target = JobTarget::into_mydb("t");
    CHECK(f.store.create_job(j).autocomplete);
  }
  SUBCASE("extraction targets are confined to the extract queue") {
    CHECK(error_of([&] {
            f.store.create_job({"alice", "x", "short", JobTarget::extract_file("MyDB.t", "csv")});
          }) == ErrorCode::TargetRequired);
    CHECK(error_of([&] {
            f.store.create_job({"alice", "x", "extract", JobTarget::return_rows()});
          }) == ErrorCode::TargetRequired);
    auto r = f.store.create_job(
        {"alice", "select * from MyDB.t", "extract", JobTarget::extract_file("MyDB.t", "csv")});
    CHECK(r.queue == "extract");
  }
  SUBCASE("job ids increase monotonically") {
    auto a = f.submit_short("alice");
    auto b = f.submit_short("bob");
    CHECK(b.job_id > a.job_id);
  }
}

TEST_CASE("transition") {
  Fixture f;
  auto job = f.submit_short("alice");

  auto started = f.store.transition(job.job_id, JobState::Started);
  CHECK(started.state == JobState::Started);
  REQUIRE(started.started_at);
  CHECK(*started.started_at >= started.submitted_at);

  auto killed = f.store.transition(job.job_id, JobState::Killed, {.error = "time limit"});
  CHECK(killed.state == JobState::Killed);
  REQUIRE(killed.finished_at);
  CHECK(*killed.finished_at >= *killed.started_at);

  CHECK(error_of([&] { f.store.transition(job.job_id, JobState::Started); }) ==
        ErrorCode::IllegalTransition);
  CHECK(error_of([&] { f.store.transition(9999, JobState::Started); }) == ErrorCode::UnknownJob);

  auto done = f.submit_short("alice");
  f.store.transition(done.job_id, JobState::Started);
  f.store.transition(done.job_id, JobState::Succeeded);
  CHECK(error_of([&] { f.store.transition(done.job_id, JobState::Started); }) ==
        ErrorCode::IllegalTransition);

  auto queued = f.submit_short("alice");
  CHECK(f.store.transition(queued.job_id, JobState::Cancelled).state == JobState::Cancelled);
}

TEST_CASE("output_url only on SUCCEEDED and never for MyDB targets") {
  Fixture f;
  auto job = f.store.create_job({"alice", "select 1 into MyDB.t", "long", JobTarget::into_mydb("t")});
  f.store.transition(job.job_id, JobState::Started);
  CHECK(error_of([&] {
          f.store.transition(job.job_id, JobState::Succeeded, {.output_url = "/files/x"});
        }) == ErrorCode::StorageFailure);
  auto j2 = f.submit_short("alice");
  f.store.transition(j2.job_id, JobState::Started);
  CHECK(error_of([&] {
          f.store.transition(j2.job_id, JobState::Failed, {.output_url = "/files/x"});
        }) == ErrorCode::StorageFailure);
  auto ok = f.store.transition(j2.job_id, JobState::Succeeded, {.output_url = "/files/abc"});
  CHECK(ok.output_url == "/files/abc");
}

TEST_CASE("state-machine closure over random transition sequences") {
  // Oracle: reachability over an edge list written independently of
  // is_legal_transition.
  const std::multimap<JobState, JobState> edges = {
      {JobState::Submitted, JobState::Started},  {JobState::Submitted, JobState::Cancelled},
      {JobState::Started, JobState::Succeeded},  {JobState::Started, JobState::Failed},
      {JobState::Started, JobState::Killed},     {JobState::Started, JobState::Cancelled},
      {JobState::Started, JobState::Promoted},
  };
  auto oracle_legal = [&](JobState a, JobState b) {
    auto [lo, hi] = edges.equal_range(a);
    return std::any_of(lo, hi, [&](const auto& e) { return e.second == b; });
  };
  const std::vector<JobState> all = {JobState::Submitted, JobState::Started, JobState::Succeeded,
                                     JobState::Failed,    JobState::Killed,  JobState::Cancelled,
                                     JobState::Promoted};
  for (JobState a : all) {
    for (JobState b : all) CHECK(is_legal_transition(a, b) == oracle_legal(a, b));
  }

  Fixture f;
  std::mt19937 rng(12345);
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  std::uniform_int_distribution<int> len(1, 5);
  int illegal_seen = 0;
  f.store.with_db([](sqlite::Database& db) { db.exec("PRAGMA synchronous=OFF"); });
  for (int seq = 0; seq < 10000; ++seq) {
    const JobId id = f.submit_short(seq % 2 ? "alice" : "bob").job_id;
    JobState expected = JobState::Submitted;
    const int n = len(rng);
    for (int step = 0; step < n; ++step) {
      const JobState to = all[pick(rng)];
      try {
        const JobState before = expected;
        expected = f.store.transition(id, to).state;
        REQUIRE(oracle_legal(before, expected));
      } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::IllegalTransition);
        REQUIRE_FALSE(oracle_legal(expected, to));
        ++illegal_seen;
      }
    }
    const JobRecord stored = f.store.get_job(id);
    REQUIRE(stored.state == expected);
    REQUIRE_FALSE(check_record(stored));
    // Reachable from SUBMITTED within two legal edges.
    const bool reachable = expected == JobState::Submitted ||
                           oracle_legal(JobState::Submitted, expected) ||
                           (oracle_legal(JobState::Submitted, JobState::Started) &&
                            oracle_legal(JobState::Started, expected));
    REQUIRE(reachable);
  }
  CHECK(illegal_seen > 0);
}

TEST_CASE("list_jobs") {
  Fixture f;
  CHECK(f.store.list_jobs("bob").empty());
  auto a = f.submit_short("alice", "select 1");
  auto b = f.submit_short("alice", "select 2");
  auto c = f.submit_short("alice", "select 3");
  auto listed = f.store.list_jobs("alice");
  REQUIRE(listed.size() == 3);
  CHECK(listed[0].job_id == c.job_id);
  CHECK(listed[1].job_id == b.job_id);
  CHECK(listed[2].job_id == a.job_id);
  CHECK(error_of([&] { f.store.list_jobs("nobody"); }) == ErrorCode::UnknownUser);
}

TEST_CASE("list_jobs state filter matches a direct store scan") {
  Fixture f;
  std::mt19937 rng(7);
  const std::vector<JobState> finals = {JobState::Succeeded, JobState::Failed, JobState::Killed,
                                        JobState::Cancelled};
  for (int i = 0; i < 60; ++i) {
    auto j = f.submit_short(i % 3 == 0 ? "bob" : "alice");
    if (i % 5 == 0) continue;  // stays SUBMITTED
    f.store.transition(j.job_id, JobState::Started);
    if (i % 7 == 0) continue;  // stays STARTED
    f.store.transition(j.job_id, finals[rng() % finals.size()]);
  }
  for (const char* user : {"alice", "bob"}) {
    auto killed = f.store.list_jobs(user, {.state = JobState::Killed});
    // Direct scan.
    std::vector<JobId> direct = f.store.with_db([&](sqlite::Database& db) {
      auto st = db.prepare(
          "SELECT job_id FROM jobs WHERE user_id = ?1 AND state = 'KILLED' ORDER BY job_id DESC");
      st.bind(1, user);
      std::vector<JobId> ids;
      while (st.step()) ids.push_back(st.column_int64(0));
      return ids;
    });
    REQUIRE(killed.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
      CHECK(killed[i].job_id == direct[i]);
      CHECK(killed[i].state == JobState::Killed);
      CHECK(killed[i].user_id == user);
    }
  }
  auto in_short = f.store.list_jobs("alice", {.queue = std::string("short")});
  CHECK(in_short.size() == f.store.list_jobs("alice").size());
  CHECK(f.store.list_jobs("alice", {.queue = std::string("long")}).empty());
  CHECK(f.store.list_jobs("alice", {.submitted_from = now_ms() + 100000}).empty());
}

TEST_CASE("list_jobs never leaks across users") {
  Fixture f;
  f.store.create_user("carol");
  const std::vector<std::string> users = {"alice", "bob", "carol"};
  std::map<std::string, std::set<JobId>> created;
  for (int i = 0; i < 30; ++i) {
    const std::string& u = users[static_cast<std::size_t>(i) % users.size()];
    created[u].insert(f.submit_short(u).job_id);
  }
  for (const auto& u : users) {
    std::set<JobId> listed;
    for (const auto& r : f.store.list_jobs(u)) listed.insert(r.job_id);
    CHECK(listed == created[u]);
  }
}

TEST_CASE("resubmit") {
  Fixture f;
  auto job = f.submit_short("alice", "select 42");
  f.store.transition(job.job_id, JobState::Started);
  CHECK(error_of([&] { f.store.resubmit(job.job_id); }) == ErrorCode::NotTerminal);
  f.store.transition(job.job_id, JobState::Failed, {.error = "boom"});

  auto c1 = f.store.resubmit(job.job_id);
  auto c2 = f.store.resubmit(job.job_id);
  CHECK(c1.job_id != c2.job_id);
  CHECK(c1.job_id != job.job_id);
  for (const auto& c : {c1, c2}) {
    CHECK(c.state == JobState::Submitted);
    CHECK(c.query_text == "select 42");
    CHECK(c.queue == "short");
    CHECK(c.target == job.target);
    CHECK(c.parent_job == job.job_id);
  }
  CHECK(f.store.get_job(job.job_id).state == JobState::Failed);
  CHECK(error_of([&] { f.store.resubmit(12345); }) == ErrorCode::UnknownJob);
}

TEST_CASE("concurrent transitions never produce an illegal edge") {
  Fixture f;
  std::vector<JobId> ids;
  for (int i = 0; i < 50; ++i) ids.push_back(f.submit_short("alice").job_id);
  std::atomic<int> started{0};
  std::atomic<int> finished{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (JobId id : ids) {
        try {
          f.store.transition(id, JobState::Started);
          ++started;
        } catch (const Error&) {
        }
        try {
          f.store.transition(id, t % 2 ? JobState::Succeeded : JobState::Killed);
          ++finished;
        } catch (const Error&) {
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(started == 50);
  CHECK(finished == 50);
  for (JobId id : ids) {
    auto r = f.store.get_job(id);
    CHECK(is_terminal(r.state));
    CHECK_FALSE(check_record(r));
  }
}

TEST_CASE("store survives restart and recovers orphans") {
  TempDir dir;
  JobId running = 0;
  JobId queued = 0;
  {
    Store store(dir / "admin.db", QueueSet::defaults());
    store.create_user("alice");
    running = store.create_job({"alice", "select 1", "short", {}}).job_id;
    queued = store.create_job({"alice", "select 2", "short", {}}).job_id;
    store.transition(running, JobState::Started);
  }
  Store store(dir / "admin.db", QueueSet::defaults());
  auto orphans = store.recover_orphans();
  REQUIRE(orphans.size() == 1);
  CHECK(orphans[0] == running);
  auto r = store.get_job(running);
  CHECK(r.state == JobState::Failed);
  CHECK(r.error == "orphaned by restart");
  CHECK(store.get_job(queued).state == JobState::Submitted);
  REQUIRE(store.active_jobs().size() == 1);
  auto next = store.create_job({"alice", "select 3", "short", {}});
  CHECK(next.job_id > queued);
}

TEST_CASE("accounts") {
  TempDir dir;
  Store store(dir / "admin.db", QueueSet::defaults());
  auto u = store.create_user("Alice", std::string_view("secret"));
  CHECK(u.user_id == "alice");
  CHECK(u.quota_bytes == 104857600);
  CHECK(store.verify_password("alice", "secret"));
  CHECK_FALSE(store.verify_password("alice", "wrong"));
  CHECK_FALSE(store.verify_password("nobody", "secret"));
  CHECK(error_of([&] { store.create_user("bad id"); }) == ErrorCode::BadRequest);
  CHECK(error_of([&] { store.create_user("x", std::nullopt, 0); }) == ErrorCode::BadRequest);
}

TEST_CASE("queue set validation") {
  auto d = QueueSet::defaults();
  CHECK(d.shortest().name == "short");
  CHECK(d.shortest().time_limit_s == 60);
  CHECK(d.shortest().max_concurrency == 8);
  CHECK_FALSE(d.shortest().requires_mydb_target);
  CHECK(d.longest().time_limit_s == 28800);
  CHECK(d.longest().max_concurrency == 2);
  CHECK(d.longest().requires_mydb_target);
  CHECK(error_of([] { QueueSet({{"a", 10, 1, {}, false}, {"b", 10, 1, {}, true}}); }) ==
        ErrorCode::BadRequest);
  CHECK(error_of([] { QueueSet({{"a", 10, 1, {}, false}, {"b", 20, 1, {}, false}}); }) ==
        ErrorCode::BadRequest);
  CHECK(error_of([] { QueueSet({{"a", 10, 1, std::string("a"), false}}); }) ==
        ErrorCode::BadRequest);
  CHECK(error_of([] { QueueSet({{"a", 10, 0, {}, false}}); }) == ErrorCode::BadRequest);
  CHECK(error_of([&] { d.get("nope"); }) == ErrorCode::UnknownQueue);
}

TEST_CASE("dates round-trip through ISO-8601") {
  for (const char* text : {"2004-02-01", "1969-12-31", "2000-02-29", "2004-02-01T10:30:00",
                           "2004-02-01T00:00:00.123", "1950-06-15T23:59:59.5"}) {
    auto d = Date::parse_iso(text);
    REQUIRE(d);
    auto again = Date::parse_iso(d->to_iso());
    REQUIRE(again);
    CHECK(*again == *d);
  }
  CHECK(Date::parse_iso("2004-02-01T10:30:00.500")->to_iso() == "2004-02-01T10:30:00.500");
  CHECK(Date::parse_iso("2004-02-01T10:30:00Z")->to_iso() == "2004-02-01T10:30:00");
  for (const char* bad : {"2001-02-29", "2004-13-01", "04-02-01", "2004/02/01", "2004-02-01 10:00:00",
                          "2004-02-01T25:00:00", ""}) {
    CHECK_FALSE(Date::parse_iso(bad));
  }
}

TEST_CASE("content hash is order-independent and type-sensitive") {
  Schema s = {{"id", ColumnType::Integer}, {"name", ColumnType::String}};
  std::vector<Row> a = {{std::int64_t{1}, std::string("x")}, {std::int64_t{2}, Null{}}};
  std::vector<Row> b = {a[1], a[0]};
  CHECK(content_hash(s, a) == content_hash(s, b));
  std::vector<Row> c = {{std::string("1"), std::string("x")}, {std::int64_t{2}, Null{}}};
  CHECK(content_hash(s, a) != content_hash(s, c));
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(from_hex(to_hex(std::vector<std::uint8_t>{0, 1, 254, 255})) ==
        std::vector<std::uint8_t>{0, 1, 254, 255});
  CHECK(from_hex("zz").empty());
}

TEST_CASE("error codes have unique names") {
  std::set<std::string_view> names;
  for (ErrorCode c : all_error_codes()) CHECK(names.insert(code_name(c)).second);
  CHECK(names.size() == all_error_codes().size());
}

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

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "casq/core/digest.hpp"
#include "casq/exchange/csv.hpp"
#include "casq/exchange/extraction.hpp"
#include "casq/exchange/file_sink.hpp"
#include "casq/exchange/file_store.hpp"
#include "casq/exchange/import.hpp"
#include "casq/exchange/votable.hpp"
#include "doctest.h"
#include "error_of.hpp"
#include "random_tables.hpp"
#include "temp_dir.hpp"
#include "xml_check.hpp"

using namespace casq;
using namespace casq::exchange;
using namespace casq::testing;

namespace {

struct Env {
  TempDir dir;
  Store store{dir / "admin.db", QueueSet::defaults()};
  mydb::MyDbManager mydb{store, dir / "mydb"};
  mydb::Groups groups{store, mydb};
  FileStore files{dir / "files"};

  Env() {
    for (const char* u : {"alice", "bob", "cosmology", "eve"}) store.create_user(u);
  }
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("csv quoting") {
  CHECK(csv_escape("a,\"b\"") == "\"a,\"\"b\"\"\"");
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  CHECK(csv_escape("cr\r") == "\"cr\r\"");

  const Schema s = {{"id", ColumnType::Integer}, {"name", ColumnType::String}, {"d", ColumnType::Date}};
  CHECK(to_csv(s, {}) == "id,name,d\r\n");
  const std::vector<Row> rows = {{std::int64_t{1}, std::string("a,\"b\""), *Date::parse_iso("2004-02-01")},
                                 {Null{}, std::string(""), Null{}}};
  CHECK(to_csv(s, rows) == "id,name,d\r\n1,\"a,\"\"b\"\"\",2004-02-01\r\n,\"\",\r\n");
}

TEST_CASE("csv parsing") {
  const auto recs = parse_csv("a,b\r\n\"x,\"\"y\"\"\",\n,\"\"\n");
  REQUIRE(recs.size() == 3);
  CHECK(recs[1][0] == std::optional<std::string>("x,\"y\""));
  CHECK(!recs[1][1].has_value());
  CHECK(!recs[2][0].has_value());
  CHECK(recs[2][1] == std::optional<std::string>(""));
  CHECK(error_of([] { parse_csv("\"open"); }) == ErrorCode::BadRequest);
  CHECK(error_of([] { parse_csv("\"a\"b,c"); }) == ErrorCode::BadRequest);

  CHECK(convert_field(std::string("21.5"), ColumnType::Float) == std::optional<Value>(21.5));
  CHECK(convert_field(std::string(" 7 "), ColumnType::Integer) == std::optional<Value>(std::int64_t{7}));
  CHECK(!convert_field(std::string("abc"), ColumnType::Float).has_value());
  CHECK(!convert_field(std::string("1.5"), ColumnType::Integer).has_value());
  CHECK(!convert_field(std::string("02/01/2004"), ColumnType::Date).has_value());
  CHECK(convert_field(std::string("2004-02-01"), ColumnType::Date).has_value());
}

TEST_CASE("votable structure") {
  const Schema s = {{"id", ColumnType::Integer}};
  const std::string doc = to_votable("t", s, {{std::int64_t{1}}, {std::int64_t{2}}});
  std::map<std::string, int> counts;
  CHECK(xml_problem(doc, &counts).empty());
  CHECK(counts["TR"] == 2);
  CHECK(counts["FIELD"] == 1);
  CHECK(counts["RESOURCE"] == 1);
  CHECK(counts["TABLE"] == 1);
  CHECK(doc.find("datatype=\"int\"") != std::string::npos);

  std::map<std::string, int> empty_counts;
  const std::string empty = to_votable("t", s, {});
  CHECK(xml_problem(empty, &empty_counts).empty());
  CHECK(empty_counts["TR"] == 0);

  CHECK(votable_datatype(ColumnType::Float) == "double");
  CHECK(votable_datatype(ColumnType::String) == "char");
  CHECK(votable_datatype(ColumnType::Date) == "char");

  // The checker itself rejects broken documents.
  CHECK(!xml_problem("<a><b></a></b>").empty());
  CHECK(!xml_problem("<a x=1/>").empty());
  CHECK(!xml_problem("<a>&bogus;</a>").empty());
  CHECK(!xml_problem("<a/><b/>").empty());
}

TEST_CASE("votable well-formed for random schemas") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 200; ++round) {
    const Schema s = random_schema(rng);
    std::vector<Row> rows;
    const int n = std::uniform_int_distribution<int>(0, 5)(rng);
    for (int i = 0; i < n; ++i) {
      Row r;
      for (const auto& c : s) r.push_back(random_value(rng, c.type));
      rows.push_back(std::move(r));
    }
    std::map<std::string, int> counts;
    const std::string doc = to_votable("random<&>", s, rows);
    const std::string problem = xml_problem(doc, &counts);
    INFO(doc);
    REQUIRE(problem.empty());
    CHECK(counts["FIELD"] == static_cast<int>(s.size()));
    CHECK(counts["TR"] == n);
  }
}

TEST_CASE("import_csv") {
  Env env;
  env.mydb.create_table("alice", "t", {{"id", ColumnType::Integer}, {"r", ColumnType::Float}}).commit();

  const auto res = import_csv(env.mydb, "alice", "t", "id,r\n1,21.5");
  CHECK(res.rows == 1);
  std::vector<Row> back;
  env.mydb.read_table("alice", "t", 10, [&](const Schema&, const std::vector<Row>& b) {
    back.insert(back.end(), b.begin(), b.end());
  });
  REQUIRE(back.size() == 1);
  CHECK(back[0][0] == Value{std::int64_t{1}});
  CHECK(back[0][1] == Value{21.5});

  // Whole file rejected on one bad field.
  try {
    import_csv(env.mydb, "alice", "t", "id,r\n2,1.0\n1,abc\n");
    FAIL("expected TypeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TypeMismatch);
    CHECK(std::string(e.what()).find("row 2 column 2") != std::string::npos);
  }
  CHECK(env.mydb.get_table("alice", "t").row_count == 1);

  try {
    import_csv(env.mydb, "alice", "nothere", "id\n1\n");
    FAIL("expected NoSuchTable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSuchTable);
    CHECK(std::string(e.what()).find("column names like col5") != std::string::npos);
  }

  CHECK(error_of([&] { import_csv(env.mydb, "alice", "t", "id\n1\n"); }) == ErrorCode::ArityMismatch);
  CHECK(error_of([&] { import_csv(env.mydb, "alice", "t", "id,x\n1,2\n"); }) == ErrorCode::ArityMismatch);
  CHECK(error_of([&] { import_csv(env.mydb, "alice", "t", "id,r\n1\n"); }) == ErrorCode::ArityMismatch);

  // Header order and case are free.
  CHECK(import_csv(env.mydb, "alice", "t", "R,ID\r\n3.5,4\r\n").rows == 1);
  CHECK(env.mydb.get_table("alice", "t").row_count == 2);

  // Quota applies as for SELECT INTO.
  env.store.set_quota("alice", env.mydb.info("alice").used_bytes + 40);
  std::string big = "id,r\n";
  for (int i = 0; i < 10; ++i) big += std::to_string(i) + ",1.0\n";
  CHECK(error_of([&] { import_csv(env.mydb, "alice", "t", big); }) == ErrorCode::QuotaExceeded);
  CHECK(env.mydb.get_table("alice", "t").row_count == 2);
}

TEST_CASE("export then import reproduces the table") {
  Env env;
  std::mt19937_64 rng(20040201);
  for (int round = 0; round < 60; ++round) {
    const Schema s = random_schema(rng);
    std::vector<Row> rows;
    const int n = std::uniform_int_distribution<int>(0, 20)(rng);
    for (int i = 0; i < n; ++i) {
      Row r;
      for (const auto& c : s) r.push_back(random_value(rng, c.type));
      // A lone empty field would be a blank line; keep single-column
      // string rows distinguishable.
      rows.push_back(std::move(r));
    }
    const std::string src = "src" + std::to_string(round);
    const std::string dst = "dst" + std::to_string(round);
    env.mydb.select_into("alice", src, s, rows);
    env.mydb.create_table("alice", dst, s).commit();

    std::string csv;
    env.mydb.read_table("alice", src, 7, [&](const Schema& schema, const std::vector<Row>& b) {
      if (csv.empty()) csv = to_csv(schema, {});
      for (const auto& r : b) csv += to_csv(schema, {r}).substr(to_csv(schema, {}).size());
    });
    CHECK(import_csv(env.mydb, "alice", dst, csv).rows == n);

    std::vector<Row> back;
    env.mydb.read_table("alice", dst, 100, [&](const Schema&, const std::vector<Row>& b) {
      back.insert(back.end(), b.begin(), b.end());
    });
    INFO(csv);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(back[i] == rows[i]);
  }
}

TEST_CASE("file store") {
  TempDir dir;
  FileStore files(dir / "files");
  const auto a = files.put("csv", "id\r\n1\r\n");
  CHECK(a.url == "/files/" + a.digest);
  CHECK(a.digest == sha256_hex("id\r\n1\r\n"));
  CHECK(a.bytes == 7);
  CHECK(a.expires_at - a.created_at == 7LL * 24 * 3600 * 1000);
  auto found = files.find(a.digest);
  REQUIRE(found.has_value());
  CHECK(sha256_hex(read_file(found->path)) == a.digest);
  CHECK(!files.find("../etc/passwd").has_value());
  CHECK(!files.find(std::string(64, '0')).has_value());

  // No temporary files are left behind.
  int entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "files")) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);

  {
    auto w = files.begin("csv");
    w.out() << "abandoned";
  }
  CHECK(std::distance(std::filesystem::directory_iterator(dir / "files"), std::filesystem::directory_iterator()) == 1);

  FileStore expired(dir / "files", 0);
  CHECK(!expired.find(a.digest).has_value());
  CHECK(expired.sweep() == 1);
  CHECK(!files.find(a.digest).has_value());
}

TEST_CASE("file sink") {
  TempDir dir;
  FileStore files(dir / "files");
  FileSink sink(files, ExportFormat::Csv, "t");
  const Schema s = {{"x", ColumnType::Integer}};
  sink.on_schema(s);
  sink.on_batch({{std::int64_t{5}}});
  const auto url = sink.finish();
  REQUIRE(url.has_value());
  const auto art = files.find(url->substr(std::string("/files/").size()));
  REQUIRE(art.has_value());
  CHECK(read_file(art->path) == "x\r\n5\r\n");
  CHECK(error_of([] { parse_export_format("xls"); }) == ErrorCode::UnsupportedFormat);
  CHECK(parse_export_format("VOTable") == ExportFormat::Votable);
}

TEST_CASE("export jobs") {
  Env env;
  const Schema s = {{"objid", ColumnType::Integer}, {"r", ColumnType::Float}};
  std::vector<Row> rows;
  for (int i = 0; i < 50; ++i) rows.push_back({std::int64_t{i}, 20.0 + i});
  env.mydb.select_into("alice", "rgal", s, rows);
  env.mydb.select_into("cosmology", "rgal", s, rows);
  const auto g = env.groups.create_group("cosmology", "cosmo");
  env.groups.invite(g.group_id, "cosmology", "bob");
  env.groups.accept(g.group_id, "bob");
  env.groups.publish("cosmology", "rgal", g.group_id);

  ExtractionProcessor proc(env.store, env.mydb, env.groups, env.files, 2, 16);

  const auto job = proc.enqueue_export({"alice", "MyDB.rgal", "CSV"});
  CHECK(job.queue == "extract");
  const auto done = proc.wait(job.job_id, std::chrono::seconds(10));
  REQUIRE(done.has_value());
  CHECK(done->state == JobState::Succeeded);
  CHECK(done->rows_produced == 50);
  REQUIRE(done->output_url.has_value());
  CHECK(done->worker.rfind("extract#", 0) == 0);
  const std::string digest = done->output_url->substr(7);
  const auto art = env.files.find(digest);
  REQUIRE(art.has_value());
  CHECK(sha256_hex(read_file(art->path)) == digest);

  const auto vot = proc.enqueue_export({"bob", "GROUP.cosmology.rgal", "votable"});
  const auto vdone = proc.wait(vot.job_id, std::chrono::seconds(10));
  REQUIRE(vdone.has_value());
  CHECK(vdone->state == JobState::Succeeded);
  const auto vart = env.files.find(vdone->output_url->substr(7));
  REQUIRE(vart.has_value());
  std::map<std::string, int> counts;
  CHECK(xml_problem(read_file(vart->path), &counts).empty());
  CHECK(counts["TR"] == 50);

  CHECK(error_of([&] { proc.enqueue_export({"alice", "MyDB.rgal", "xls"}); }) == ErrorCode::UnsupportedFormat);
  CHECK(error_of([&] { proc.enqueue_export({"eve", "GROUP.cosmology.rgal", "csv"}); }) == ErrorCode::AccessDenied);
  CHECK(error_of([&] { proc.enqueue_export({"alice", "MyDB.nothere", "csv"}); }) == ErrorCode::NoSuchTable);
  CHECK(error_of([&] { proc.enqueue_export({"alice", "GROUP.x", "csv"}); }) == ErrorCode::MalformedPseudoName);

  // Empty table exports a header only.
  env.mydb.create_table("alice", "empty", s).commit();
  const auto e = proc.wait(proc.enqueue_export({"alice", "empty", "csv"}).job_id, std::chrono::seconds(10));
  REQUIRE(e.has_value());
  CHECK(read_file(env.files.find(e->output_url->substr(7))->path) == "objid,r\r\n");
}

TEST_CASE("extraction workers are separate from query workers") {
  Env env;
  const Schema s = {{"x", ColumnType::Integer}};
  std::vector<Row> rows;
  for (int i = 0; i < 2000; ++i) rows.push_back({std::int64_t{i}});
  env.mydb.select_into("alice", "big", s, rows);
  ExtractionProcessor proc(env.store, env.mydb, env.groups, env.files, 3, 64);
  std::vector<JobId> ids;
  for (int i = 0; i < 20; ++i) ids.push_back(proc.enqueue_export({"alice", "big", i % 2 ? "csv" : "votable"}).job_id);
  proc.wait_idle();
  for (JobId id : ids) {
    const auto r = env.store.get_job(id);
    CHECK(r.state == JobState::Succeeded);
    CHECK(r.queue == "extract");
    CHECK(r.worker.rfind("extract#", 0) == 0);
  }
  for (const auto& q : env.store.queues().all()) CHECK(q.name != "extract");
}

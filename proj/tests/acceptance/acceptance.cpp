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

// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Usage: acceptance [name-substring...]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "casq/core/digest.hpp"
#include "casq/core/error.hpp"
#include "casq/exchange/extraction.hpp"
#include "casq/exchange/import.hpp"
#include "casq/federation/token.hpp"
#include "casq/loader/engine.hpp"
#include "casq/mydb/groups.hpp"
#include "casq/scheduler/scheduler.hpp"
#include "casq/scheduler/sqlite_backend.hpp"
#include "casq/scheduler/workload.hpp"
#include "casq/sqlrewrite/rewrite.hpp"
#include "casq/wheel/wheel.hpp"
#include "random_tables.hpp"
#include "service_fixture.hpp"
#include "xml_check.hpp"

using namespace casq;
using namespace casq::testing;
using nlohmann::json;
using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- scheduler

struct CountingSink : scheduler::ResultSink {
  void on_schema(const Schema&) override {}
  void on_batch(const std::vector<Row>&) override {}
  std::optional<std::string> finish() override { return std::nullopt; }
};

// Runs queries as written and discards their rows.
struct PlainEnv : scheduler::JobEnvironment {
  scheduler::ExecutionRequest prepare(const JobRecord& job) override {
    return {sqlrewrite::prepare_for_backend(job.query_text), {}, std::nullopt};
  }
  std::unique_ptr<scheduler::ResultSink> open_sink(const JobRecord&) override {
    return std::make_unique<CountingSink>();
  }
};

struct Rig {
  TempDir dir;
  Store store;
  PlainEnv env;
  scheduler::SqliteBackend backend;
  scheduler::Scheduler sched;

  explicit Rig(QueueSet queues)
      : store(dir / "admin.db", std::move(queues)),
        backend(scheduler::SqliteBackendOptions{empty_catalog(dir / "catalog.db"), dir.path(), nullptr, 256}),
        sched(store, env, backend) {
    store.create_user("alice");
  }

  static std::filesystem::path empty_catalog(const std::filesystem::path& p) {
    sqlite::Database db(p);
    db.exec("CREATE TABLE IF NOT EXISTS one (x INTEGER)");
    return p;
  }

  JobRecord submit(double seconds, const std::string& queue, bool autocomplete = false) {
    // Long-queue results must land in MyDB; the sink here only counts.
    const bool mydb = queue != store.queues().shortest().name || autocomplete;
    return sched
        .create_and_submit({"alice", "select sleep(" + fmt("%.4f", seconds) + ")", queue,
                            mydb ? JobTarget::into_mydb("t") : JobTarget::return_rows(), autocomplete})
        .job;
  }
};

double runtime_s(const JobRecord& j) { return static_cast<double>(*j.finished_at - *j.started_at) / 1000.0; }

Outcome termination() {
  const auto t0 = Clock::now();
  Rig rig(QueueSet({{"short", 2, 8, "long", false}, {"long", 20, 8, std::nullopt, true}}));
  const auto samples = scheduler::generate_workload(200, 2.0, 2004, 0.25);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    // A quarter go straight to the long queue; half of the rest may be promoted.
    if (i % 4 == 0) {
      rig.submit(samples[i].duration, "long");
    } else {
      rig.submit(samples[i].duration, "short", i % 2 == 1);
    }
  }
  rig.sched.drain();
  const double elapsed = seconds_since(t0);

  std::map<JobState, int> states;
  int over_limit = 0;
  int not_final = 0;
  double worst_ratio = 0;
  const auto jobs = rig.store.list_jobs("alice");
  for (const auto& j : jobs) {
    ++states[j.state];
    if (!is_terminal(j.state)) ++not_final;
    if (j.started_at && j.finished_at) {
      const double ratio = runtime_s(j) / rig.store.queues().get(j.queue).time_limit_s;
      worst_ratio = std::max(worst_ratio, ratio);
      if (ratio > 1.05) ++over_limit;
    }
  }
  const int originals = static_cast<int>(std::count_if(jobs.begin(), jobs.end(), [](const JobRecord& j) { return !j.parent_job; }));
  std::ostringstream d;
  d << originals << " jobs (+" << jobs.size() - originals << " promoted children): ";
  for (const auto& [s, n] : states) d << state_name(s) << "=" << n << " ";
  d << "| max runtime/limit " << fmt("%.3f", worst_ratio) << " | suite " << fmt("%.1f", elapsed) << " s";
  return {originals == 200 && not_final == 0 && over_limit == 0 && elapsed <= 120, d.str()};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0;
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

// Median queue wait of 50 short jobs submitted in five bursts of ten.
struct WaitRun {
  double median_ms = 0;
  bool long_saturated = true;
};

WaitRun short_waits(bool load_long) {
  Rig rig(QueueSet({{"short", 5, 4, "long", false}, {"long", 60, 2, std::nullopt, true}}));
  auto long_running = [&] {
    for (const auto& s : rig.sched.stats()) {
      if (s.name == "long") return s.running;
    }
    return std::size_t{0};
  };
  if (load_long) {
    for (int i = 0; i < 10; ++i) rig.submit(20, "long");
    const auto until = Clock::now() + 5s;
    while (long_running() < 2 && Clock::now() < until) std::this_thread::sleep_for(5ms);
  }
  WaitRun out;
  std::vector<JobId> ids;
  for (int burst = 0; burst < 5; ++burst) {
    for (int i = 0; i < 10; ++i) ids.push_back(rig.submit(0.1, "short").job_id);
    if (load_long && long_running() < 2) out.long_saturated = false;
    std::this_thread::sleep_for(600ms);
  }
  std::vector<double> waits;
  for (JobId id : ids) {
    const auto j = rig.sched.wait(id, 10s);
    if (!j || !j->started_at) continue;
    waits.push_back(static_cast<double>(*j->started_at - j->submitted_at));
  }
  if (load_long && long_running() < 2) out.long_saturated = false;
  out.median_ms = waits.size() == ids.size() ? median(waits) : 1e18;
  rig.sched.stop();
  return out;
}

Outcome queue_isolation() {
  const auto base = short_waits(false);
  const auto loaded = short_waits(true);
  const bool pass = loaded.long_saturated && loaded.median_ms <= 2 * base.median_ms;
  return {pass, "median short wait " + fmt("%.0f", loaded.median_ms) + " ms with 10 long jobs queued vs " +
                    fmt("%.0f", base.median_ms) + " ms unloaded (limit 2x)" +
                    (loaded.long_saturated ? "" : "; long queue was not saturated")};
}

Outcome autocomplete() {
  Rig rig(QueueSet({{"short", 1, 2, "long", false}, {"long", 10, 2, std::nullopt, true}}));
  const auto original = rig.submit(2.0, "short", true);
  rig.sched.wait_idle();
  const auto jobs = rig.store.list_jobs("alice");
  int promoted = 0;
  std::vector<JobRecord> children;
  for (const auto& j : jobs) {
    if (j.state == JobState::Promoted) ++promoted;
    if (j.parent_job == original.job_id) children.push_back(j);
  }
  const bool child_ok = children.size() == 1 && children[0].queue == "long" &&
                        children[0].state == JobState::Succeeded;
  const bool pass = promoted == 1 && rig.store.get_job(original.job_id).state == JobState::Promoted && child_ok;
  std::ostringstream d;
  d << promoted << " PROMOTED record, " << children.size() << " child";
  if (!children.empty()) d << " (" << children[0].queue << ", " << state_name(children[0].state) << ")";
  return {pass, d.str()};
}

// ---------------------------------------------------------------- mydb

// Byte charge of one row, written from the accounting rule: 8 per
// numeric or date cell, the byte length of a string (0 when null),
// 16 per row.
std::int64_t oracle_row_bytes(const Schema& s, const Row& r) {
  std::int64_t n = 16;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].type == ColumnType::String) {
      if (const auto* str = std::get_if<std::string>(&r[i])) n += static_cast<std::int64_t>(str->size());
    } else {
      n += 8;
    }
  }
  return n;
}

Outcome mydb_quota() {
  TempDir dir;
  Store store(dir / "admin.db", QueueSet::defaults());
  mydb::MyDbManager mydb(store, dir / "mydb");
  constexpr std::int64_t kQuota = 1 << 20;
  store.create_user("q", std::nullopt, kQuota);
  mydb.ensure_mydb("q");

  std::mt19937_64 rng(1000);
  std::map<std::string, std::int64_t> model;
  auto model_used = [&] {
    std::int64_t n = 0;
    for (const auto& [_, b] : model) n += b;
    return n;
  };
  auto observed = [&] {
    std::map<std::string, std::int64_t> out;
    for (const auto& [name, t] : mydb.info("q").tables) out[name] = t.byte_size;
    return out;
  };

  int into = 0, drops = 0, rejected = 0;
  std::string problem;
  auto check_state = [&](const std::string& step) {
    if (!problem.empty()) return;
    const auto info = mydb.info("q");
    if (info.used_bytes > kQuota) problem = step + ": used " + std::to_string(info.used_bytes) + " above quota";
    else if (info.used_bytes != model_used()) problem = step + ": used bytes differ from the oracle";
    else if (observed() != model) problem = step + ": tables differ from the oracle";
    else if (mydb.recompute_sizes("q") != model) problem = step + ": recomputed sizes differ";
  };
  auto try_into = [&](const std::string& name, const Schema& s, const std::vector<Row>& rows, const std::string& step) {
    std::int64_t bytes = 0;
    for (const auto& r : rows) bytes += oracle_row_bytes(s, r);
    const bool fits = model_used() + bytes <= kQuota;
    const auto before = observed();
    try {
      mydb.select_into("q", name, s, rows);
      ++into;
      if (!fits) problem = step + ": accepted beyond the quota";
      model[name] = bytes;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::QuotaExceeded) {
        problem = step + ": unexpected " + std::string(code_name(e.code()));
      } else {
        ++rejected;
        if (fits) problem = step + ": rejected although it fits";
        if (observed() != before || mydb.table_exists("q", name)) {
          problem = step + ": QuotaExceeded changed state";
        }
      }
    }
    check_state(step);
  };

  for (int op = 0; op < 100 && problem.empty(); ++op) {
    const std::string step = "op " + std::to_string(op);
    std::vector<std::string> free_names, used_names;
    for (int i = 0; i < 12; ++i) {
      const std::string n = "t" + std::to_string(i);
      (model.count(n) ? used_names : free_names).push_back(n);
    }
    const bool drop = !used_names.empty() && (free_names.empty() || rng() % 3 == 0);
    if (drop) {
      const std::string name = used_names[rng() % used_names.size()];
      const std::int64_t freed = mydb.drop_table("q", name);
      ++drops;
      if (freed != model[name]) problem = step + ": freed bytes differ from the oracle";
      model.erase(name);
      check_state(step);
    } else {
      const Schema s = random_schema(rng);
      const int n = std::uniform_int_distribution<int>(0, 4000)(rng);
      std::vector<Row> rows;
      for (int i = 0; i < n; ++i) {
        Row r;
        for (const auto& c : s) r.push_back(random_value(rng, c.type));
        rows.push_back(std::move(r));
      }
      try_into(free_names[rng() % free_names.size()], s, rows, step);
    }
  }
  // Boundary: fill exactly to the quota, then one byte more.
  if (problem.empty()) {
    const Schema s = {{"pad", ColumnType::String}};
    auto pad_row = [](std::int64_t bytes) { return Row{std::string(static_cast<std::size_t>(bytes - 16), 'x')}; };
    while (model.size() >= 11) {
      const auto name = model.begin()->first;
      mydb.drop_table("q", name);
      model.erase(name);
    }
    const std::int64_t room = kQuota - model_used();
    if (room >= 17) {
      try_into("edge_over", s, {pad_row(room + 1)}, "boundary +1");
      try_into("edge_fill", s, {pad_row(room)}, "boundary exact");
      if (problem.empty() && mydb.info("q").used_bytes != kQuota) problem = "boundary: quota not reached exactly";
    }
  }
  std::ostringstream d;
  d << into << " select_into, " << drops << " drops, " << rejected << " QuotaExceeded; final used "
    << mydb.info("q").used_bytes << " of " << kQuota;
  if (!problem.empty()) d << "; " << problem;
  return {problem.empty() && rejected > 0, d.str()};
}

// ---------------------------------------------------------------- groups

std::string error_code_of(const federation::HttpResponse& r) {
  try {
    const json doc = json::parse(r.body);
    if (doc.value("ok", true)) return "ok";
    return doc.at("error").at("code").get<std::string>();
  } catch (const std::exception&) {
    return "unparseable";
  }
}

Outcome group_sharing() {
  TempDir dir;
  write_catalog(dir / "catalog.db", 400);
  Node node(test_config(dir.path()));
  auto cosmo = node.client("cosmology");
  auto bob = node.client("bob");
  auto carol = node.client("carol");
  std::vector<std::string> steps;

  const json made = wait_job(cosmo, cosmo.post("/v1/jobs", {{"query", "select objid, r into MyDB.rgal from galaxy where r < 16"},
                                                             {"queue", "long"}})["job_id"]);
  const std::int64_t rgal_rows = made.value("rows_produced", std::int64_t{0});
  const json g = cosmo.post("/v1/groups", {{"name", "cosmology"}});
  const auto gid = std::to_string(g["group_id"].get<std::int64_t>());
  cosmo.post("/v1/groups/" + gid + "/invite", {{"user", "bob"}});
  cosmo.post("/v1/groups/" + gid + "/invite", {{"user", "carol"}});
  bob.post("/v1/groups/" + gid + "/accept");
  cosmo.post("/v1/groups/" + gid + "/publish", {{"table", "rgal"}});

  const std::string q = "select count(*) from GROUP.cosmology.rgal";
  const json ok = bob.post("/v1/jobs", {{"query", q}});
  const bool member_ok = ok.value("state", "") == "SUCCEEDED" && ok["rows"][0][0].get<std::int64_t>() == rgal_rows;
  const auto denied = carol.raw("POST", "/v1/jobs", json{{"query", q}}.dump());
  const std::string carol_code = error_code_of(denied);
  const bool carol_denied = carol_code == "AccessDenied" && denied.status == 403;

  std::ostringstream d;
  d << "rgal " << made.value("state", "") << " with " << rgal_rows << " rows; accepted member counted "
    << (ok.contains("rows") ? ok["rows"][0][0].dump() : "nothing") << "; invited-only user got " << carol_code << " ("
    << denied.status << ")";
  return {made.value("state", "") == "SUCCEEDED" && rgal_rows > 0 && member_ok && carol_denied, d.str()};
}

// ---------------------------------------------------------------- wheel

Outcome ferris_wheel() {
  constexpr std::size_t kBlocks = 100;
  constexpr std::size_t kRowsPerBlock = 20;
  constexpr int kQueries = 8;
  constexpr int kTrials = 50;
  const Schema schema = {{"id", ColumnType::Integer}, {"r", ColumnType::Float}};
  std::mt19937_64 rng(207);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < kBlocks * kRowsPerBlock; ++i) {
    rows.push_back({static_cast<std::int64_t>(i), std::uniform_real_distribution<double>(10, 30)(rng)});
  }

  std::uint64_t max_reads = 0;
  int bad_results = 0, bad_revolutions = 0;
  for (int trial = 0; trial < kTrials; ++trial) {
    wheel::MemoryBlockStore store("photoobj", schema, rows, kRowsPerBlock);
    wheel::Wheel w(store);
    const std::size_t last_entry = w.entry_points().back();
    // Attach times within the first revolution, up to its last boarding point.
    std::vector<std::size_t> times{0};
    for (int i = 1; i < kQueries; ++i) times.push_back(rng() % (last_entry + 1));
    std::sort(times.begin(), times.end());
    std::vector<double> cuts;
    std::vector<std::shared_ptr<wheel::CollectingRider>> riders;
    std::vector<wheel::SessionId> ids;
    std::size_t next = 0;
    for (std::size_t now = 0; next < times.size() || !w.idle(); ++now) {
      while (next < times.size() && times[next] <= now) {
        const double cut = std::uniform_real_distribution<double>(10, 30)(rng);
        cuts.push_back(cut);
        riders.push_back(std::make_shared<wheel::CollectingRider>([cut](const Row& r) { return std::get<double>(r[1]) < cut; }));
        ids.push_back(w.attach("photoobj", riders.back()));
        ++next;
      }
      w.advance();
    }
    max_reads = std::max(max_reads, store.total_reads());
    for (int i = 0; i < kQueries; ++i) {
      // Oracle: a direct filter over the whole table.
      std::multiset<std::int64_t> expect, got;
      for (const auto& r : rows) {
        if (std::get<double>(r[1]) < cuts[i]) expect.insert(std::get<std::int64_t>(r[0]));
      }
      for (const auto& r : riders[i]->results()) got.insert(std::get<std::int64_t>(r[0]));
      if (got != expect) ++bad_results;
      const auto info = w.session(ids[i]);
      std::vector<std::size_t> order = info.delivery_order;
      std::sort(order.begin(), order.end());
      bool once = order.size() == kBlocks && info.state == wheel::SessionState::Done;
      for (std::size_t b = 0; once && b < kBlocks; ++b) once = order[b] == b;
      if (!once) ++bad_revolutions;
    }
  }
  std::ostringstream d;
  d << kTrials << " schedules of " << kQueries << " queries over B=" << kBlocks << ": max block reads " << max_reads
    << " (naive " << kQueries * kBlocks << ", limit < " << 2 * kBlocks << "); result mismatches " << bad_results
    << "; sessions without exactly one revolution " << bad_revolutions;
  return {max_reads < 2 * kBlocks && bad_results == 0 && bad_revolutions == 0, d.str()};
}

// ---------------------------------------------------------------- exchange

Outcome csv_votable() {
  TempDir dir;
  Store store(dir / "admin.db", QueueSet::defaults());
  mydb::MyDbManager mydb(store, dir / "mydb");
  mydb::Groups groups(store, mydb);
  exchange::FileStore files(dir / "files");
  store.create_user("alice");
  exchange::ExtractionProcessor proc(store, mydb, groups, files, 2, 64);

  std::mt19937_64 rng(2002);
  int csv_bad = 0, vot_bad = 0;
  std::string first_problem;
  for (int round = 0; round < 100; ++round) {
    const Schema s = random_schema(rng);
    std::vector<Row> rows;
    const int n = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int i = 0; i < n; ++i) {
      Row r;
      for (const auto& c : s) r.push_back(random_value(rng, c.type));
      rows.push_back(std::move(r));
    }
    const std::string src = "src" + std::to_string(round);
    const std::string dst = "dst" + std::to_string(round);
    mydb.select_into("alice", src, s, rows);

    auto artifact = [&](const std::string& format) -> std::string {
      const auto job = proc.enqueue_export({"alice", "MyDB." + src, format});
      const auto done = proc.wait(job.job_id, 30s);
      if (!done || done->state != JobState::Succeeded || !done->output_url) return {};
      const auto art = files.find(done->output_url->substr(std::string("/files/").size()));
      return art ? read_file(art->path) : std::string{};
    };

    // CSV: export, import into a fresh table of the same schema, compare.
    const std::string csv = artifact("csv");
    mydb.create_table("alice", dst, s).commit();
    std::vector<Row> back;
    try {
      exchange::import_csv(mydb, "alice", dst, csv);
      mydb.read_table("alice", dst, 1000, [&](const Schema&, const std::vector<Row>& b) {
        back.insert(back.end(), b.begin(), b.end());
      });
    } catch (const Error& e) {
      if (first_problem.empty()) first_problem = "round " + std::to_string(round) + ": " + e.what();
    }
    if (back != rows || mydb.get_table("alice", dst).columns != s) {
      ++csv_bad;
      if (first_problem.empty()) first_problem = "round " + std::to_string(round) + ": csv round trip differs";
    }

    // VOTable: well-formed, one FIELD per column, one TR per row, one TD per cell.
    std::map<std::string, int> counts;
    const std::string doc = artifact("votable");
    const std::string xml = doc.empty() ? "no artifact" : xml_problem(doc, &counts);
    const bool shape = counts["FIELD"] == static_cast<int>(s.size()) && counts["TR"] == n &&
                       counts["TD"] == n * static_cast<int>(s.size());
    if (!xml.empty() || !shape) {
      ++vot_bad;
      if (first_problem.empty()) first_problem = "round " + std::to_string(round) + ": votable " + (xml.empty() ? "field/row count" : xml);
    }
  }
  proc.stop();
  std::ostringstream d;
  d << "100 random tables: csv round-trip failures " << csv_bad << ", votable failures " << vot_bad;
  if (!first_problem.empty()) d << "; " << first_problem;
  return {csv_bad == 0 && vot_bad == 0, d.str()};
}

// ---------------------------------------------------------------- loader

Outcome loader_compensation() {
  using namespace loader;
  TempDir dir;
  Store store(dir / "admin.db", QueueSet::defaults());
  mydb::MyDbManager mydb(store, dir / "mydb");
  store.create_user("alice");
  // Existing content the run must leave untouched.
  mydb.select_into("alice", "notes", {{"k", ColumnType::Integer}, {"v", ColumnType::String}},
                   {{std::int64_t{1}, std::string("keep")}, {std::int64_t{2}, Null{}}});
  auto target = std::make_shared<MyDbLoadTarget>(mydb, "alice");
  LoaderEngine engine(dir / "staging.db", 1);

  std::ofstream(dir / "galaxies.csv") << "objid,r\n1,15.5\n2,16.25\n3,17\n";
  std::ofstream(dir / "stars.csv") << "id,mag\n10,9.5\n11,12\n";
  auto node = [](std::string id, StageKind kind, std::set<std::string> deps, std::string table, std::string as = {}) {
    NodeSpec n;
    n.id = std::move(id);
    n.kind = kind;
    n.deps = std::move(deps);
    n.table = std::move(table);
    n.publish_as = std::move(as);
    return n;
  };
  const auto wf = define_workflow(
      "survey",
      {{"galaxies", "galaxies.csv", {{"objid", ColumnType::Integer}, {"r", ColumnType::Float}}},
       {"stars", "stars.csv", {{"id", ColumnType::Integer}, {"mag", ColumnType::Float}}}},
      {node("check", StageKind::Check, {}, {}), node("load_galaxies", StageKind::Load, {"check"}, "galaxies"),
       node("publish_galaxies", StageKind::Publish, {"load_galaxies"}, "galaxies", "rgal"),
       node("load_stars", StageKind::Load, {"check"}, "stars"),
       node("publish_stars", StageKind::Publish, {"load_stars"}, "stars", "rstar")});

  const auto before = engine.digest(*target);
  std::promise<RunId> id_promise;
  auto id_future = id_promise.get_future().share();
  std::promise<void> requested;
  RunOptions opts;
  opts.owner = "alice";
  opts.on_node_done = [&](const std::string&, std::size_t done) {
    if (done == 3) {
      engine.request_cancel(id_future.get());
      requested.set_value();
    }
  };
  const RunId id = engine.start(wf, {dir / "galaxies.csv", dir / "stars.csv"}, target, opts);
  id_promise.set_value(id);
  if (requested.get_future().wait_for(30s) != std::future_status::ready) return {false, "run never reached stage 3"};
  const auto undo = engine.cancel(id);
  const auto rep = engine.report(id);
  std::vector<std::string> reversed(rep.completion_order.rbegin(), rep.completion_order.rend());
  const bool order_ok = undo.undone == reversed;
  const bool digest_ok = undo.digest_matches && undo.digest_after == before && engine.digest(*target) == before;

  std::ostringstream d;
  d << "completed [";
  for (std::size_t i = 0; i < rep.completion_order.size(); ++i) d << (i ? " " : "") << rep.completion_order[i];
  d << "], undone [";
  for (std::size_t i = 0; i < undo.undone.size(); ++i) d << (i ? " " : "") << undo.undone[i];
  d << "]; digest " << (digest_ok ? "matches" : "differs") << " (" << before.hash().substr(0, 12) << ")";
  return {rep.completion_order.size() >= 3 && order_ok && digest_ok && rep.state == RunState::Cancelled, d.str()};
}

// ---------------------------------------------------------------- federation

Outcome federation_checks() {
  constexpr std::int64_t kNow = 1'700'000'000'000;
  auto seed = [](std::uint8_t b) {
    std::array<std::uint8_t, federation::kSeedBytes> s{};
    s.fill(b);
    return s;
  };
  // Every topology: each ordered pair (i trusts j), i != j, present or not.
  int topology_errors = 0, checks = 0;
  for (int mask = 0; mask < 64; ++mask) {
    std::vector<federation::NodeIdentity> nodes;
    for (int i = 0; i < 3; ++i) nodes.push_back(federation::NodeIdentity::from_seed("n" + std::to_string(i), seed(static_cast<std::uint8_t>(i + 40))));
    auto bit = [&](int i, int j) { return (mask >> (i * 2 + (j < i ? j : j - 1))) & 1; };
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i != j && bit(i, j)) nodes[i].trust(nodes[j].node_id(), nodes[j].public_key());
      }
    }
    for (int issuer = 0; issuer < 3; ++issuer) {
      const auto tok = federation::issue_token(nodes[issuer], "u", 60, kNow).encode();
      for (int verifier = 0; verifier < 3; ++verifier) {
        const bool trusts = issuer == verifier || bit(verifier, issuer);
        bool verified = false;
        try {
          verified = federation::verify_token(tok, nodes[verifier], kNow).home_node == nodes[issuer].node_id();
        } catch (const Error&) {
        }
        ++checks;
        if (verified != trusts) ++topology_errors;
      }
    }
  }

  // Every single-byte change of the token bytes and of the bearer text.
  const auto a = federation::NodeIdentity::from_seed("node-a", seed(1));
  auto verifier = federation::NodeIdentity::from_seed("node-b", seed(2));
  verifier.trust(a.node_id(), a.public_key());
  const auto token = federation::issue_token(a, "alice", 3600, kNow);
  const std::string bytes = token.serialize();
  int tampers = 0, accepted = 0;
  auto accepts = [&](const std::string& text) {
    try {
      federation::verify_token(text, verifier, kNow + 1);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
    for (int flip = 1; flip < 256; ++flip) {
      std::string bad = bytes;
      bad[pos] = static_cast<char>(bad[pos] ^ flip);
      ++tampers;
      if (accepts(federation::base64url_encode(bad))) ++accepted;
    }
  }
  const std::string text = token.encode();
  const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    for (char c : alphabet) {
      if (c == text[pos]) continue;
      std::string bad = text;
      bad[pos] = c;
      ++tampers;
      if (accepts(bad)) ++accepted;
    }
  }
  const bool genuine = accepts(text);

  // A table fetched from a live peer keeps its content hash.
  TempDir da, db;
  write_catalog(da / "catalog.db", 10);
  write_catalog(db / "catalog.db", 10);
  auto ca = test_config(da.path(), "a");
  auto cb = test_config(db.path(), "b");
  ca.key_seed_hex = std::string(64, '3');
  cb.key_seed_hex = std::string(64, '4');
  cb.trust.push_back({"a", federation::NodeIdentity::from_seed_hex("a", ca.key_seed_hex).public_key_hex()});
  Node na(ca);
  cb.peers = {{"a", na.url}};
  Node nb(cb);

  std::mt19937_64 rng(77);
  const Schema s = {{"id", ColumnType::Integer}, {"name", ColumnType::String}, {"r", ColumnType::Float},
                    {"seen", ColumnType::Date}};
  std::vector<Row> rows;
  for (int i = 0; i < 300; ++i) {
    Row r{std::int64_t{i}};
    for (std::size_t c = 1; c < s.size(); ++c) r.push_back(random_value(rng, s[c].type));
    rows.push_back(std::move(r));
  }
  na.service->mydb().select_into("alice", "obs", s, rows);
  auto alice_a = na.client("alice");
  service::ApiClient alice_at_b(nb.url, alice_a.token());
  alice_at_b.post("/v1/federation/fetch", {{"node", "a"}, {"table", "obs"}, {"as", "obs_copy"}});
  auto table_hash = [](mydb::MyDbManager& m, const std::string& t) {
    std::vector<Row> all;
    Schema schema;
    m.read_table("alice", t, 1000, [&](const Schema& sc, const std::vector<Row>& b) {
      schema = sc;
      all.insert(all.end(), b.begin(), b.end());
    });
    if (schema.empty()) schema = m.get_table("alice", t).columns;
    return content_hash(schema, all);
  };
  const std::string src_hash = table_hash(na.service->mydb(), "obs");
  const std::string dst_hash = table_hash(nb.service->mydb(), "obs_copy");
  const bool hash_ok = src_hash == dst_hash && src_hash == content_hash(s, rows);

  std::ostringstream d;
  d << checks << " topology checks, " << topology_errors << " wrong; " << tampers << " tampered tokens, " << accepted
    << " accepted; fetched table hash " << (hash_ok ? "matches" : "differs") << " (" << src_hash.substr(0, 12) << ")";
  return {topology_errors == 0 && accepted == 0 && genuine && hash_ok, d.str()};
}

// ---------------------------------------------------------------- workload

Outcome workload() {
  std::ostringstream d;
  bool pass = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    std::vector<double> durations;
    for (const auto& s : scheduler::generate_workload(100000, 2.0, seed)) durations.push_back(s.duration);
    const auto fit = scheduler::fit_power_law(durations);
    pass = pass && std::abs(fit.slope + 2.0) <= 0.2 && fit.r_squared > 0.95;
    d << (seed > 1 ? "; " : "") << "seed " << seed << ": slope " << fmt("%.3f", fit.slope) << ", R2 "
      << fmt("%.4f", fit.r_squared);
  }
  return {pass, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"termination", termination},
      {"queue-isolation", queue_isolation},
      {"autocomplete", autocomplete},
      {"mydb-quota", mydb_quota},
      {"group-sharing", group_sharing},
      {"ferris-wheel", ferris_wheel},
      {"csv-votable", csv_votable},
      {"loader-compensation", loader_compensation},
      {"federation", federation_checks},
      {"workload", workload},
  };
  std::vector<std::string> filters(argv + 1, argv + argc);
  int failed = 0, ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!filters.empty() &&
        std::none_of(filters.begin(), filters.end(), [&](const std::string& f) { return name.find(f) != std::string::npos; })) {
      continue;
    }
    ++ran;
    Outcome out;
    const auto t0 = Clock::now();
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failed;
    std::cout << (out.pass ? "PASS " : "FAIL ") << name << " [" << fmt("%.1f", seconds_since(t0)) << " s] "
              << out.detail << std::endl;
  }
  std::cout << ran - failed << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

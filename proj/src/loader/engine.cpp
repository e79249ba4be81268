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

#include "casq/loader/engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "casq/core/digest.hpp"
#include "casq/core/error.hpp"
#include "casq/exchange/csv.hpp"
#include "casq/sqlrewrite/tokenizer.hpp"

namespace casq::loader {

namespace fs = std::filesystem;

std::string_view node_state_name(NodeState s) {
  switch (s) {
    case NodeState::Pending: return "PENDING";
    case NodeState::Running: return "RUNNING";
    case NodeState::Done: return "DONE";
    case NodeState::Failed: return "FAILED";
    case NodeState::Undone: return "UNDONE";
  }
  return "?";
}

std::string_view run_state_name(RunState s) {
  switch (s) {
    case RunState::Queued: return "QUEUED";
    case RunState::Running: return "RUNNING";
    case RunState::Succeeded: return "SUCCEEDED";
    case RunState::Failed: return "FAILED";
    case RunState::Cancelled: return "CANCELLED";
  }
  return "?";
}

std::string_view event_name(EventType e) {
  switch (e) {
    case EventType::Started: return "STARTED";
    case EventType::Done: return "DONE";
    case EventType::Failed: return "FAILED";
    case EventType::Aborted: return "ABORTED";
    case EventType::Undone: return "UNDONE";
  }
  return "?";
}

const NodeReport& RunReport::node(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return n;
  }
  fail(ErrorCode::BadRequest, "no node '" + id + "' in run " + std::to_string(run_id));
}

namespace {

struct Aborted {};

enum class UndoKind { Nothing, DropStaging, DropTarget, RemoveRows, Sql };

struct UndoAction {
  UndoKind kind = UndoKind::Nothing;
  std::string table;
  std::vector<std::int64_t> rowids;
  std::string sql;
};

struct Outcome {
  bool ok = true;
  bool aborted = false;
  std::int64_t rows = 0;
  std::vector<std::string> findings;
  std::vector<Violation> violations;
  std::optional<std::string> error;
  UndoAction undo;
};

std::string staging_name(RunId run, const std::string& table) { return "r" + std::to_string(run) + "_" + table; }

std::string substitute(std::string sql, RunId run) {
  const std::string key = "{staging}";
  const std::string value = "r" + std::to_string(run) + "_";
  for (std::size_t p = sql.find(key); p != std::string::npos; p = sql.find(key, p + value.size())) {
    sql.replace(p, key.size(), value);
  }
  return sql;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::StorageFailure, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path* find_input(const std::vector<fs::path>& inputs, const std::string& file) {
  for (const auto& p : inputs) {
    if (p.filename() == file || p == file) return &p;
  }
  return nullptr;
}

// Converts a CSV file against a declaration. Problems go to `findings`
// (at most `limit`); returns the rows when there are none.
std::vector<Row> convert_file(const TableDecl& decl, const std::string& text, std::vector<std::string>& findings,
                              std::size_t limit = 20) {
  std::vector<Row> rows;
  std::vector<exchange::CsvRecord> recs;
  try {
    recs = exchange::parse_csv(text);
  } catch (const Error& e) {
    findings.push_back(decl.file + ": " + e.what());
    return {};
  }
  if (recs.empty()) {
    findings.push_back(decl.file + ": file is empty");
    return {};
  }
  const auto& header = recs.front();
  std::vector<std::size_t> target;
  std::vector<bool> seen(decl.columns.size(), false);
  for (const auto& h : header) {
    const std::string name = sqlrewrite::to_lower(h.value_or(""));
    std::size_t idx = decl.columns.size();
    for (std::size_t i = 0; i < decl.columns.size(); ++i) {
      if (decl.columns[i].name == name) idx = i;
    }
    if (idx == decl.columns.size() || seen[idx]) {
      findings.push_back(decl.file + ": header column '" + name + "' is not a column of " + decl.name);
      return {};
    }
    seen[idx] = true;
    target.push_back(idx);
  }
  if (target.size() != decl.columns.size()) {
    findings.push_back(decl.file + ": header names " + std::to_string(target.size()) + " of " +
                       std::to_string(decl.columns.size()) + " columns");
    return {};
  }
  for (std::size_t r = 1; r < recs.size(); ++r) {
    const auto& rec = recs[r];
    if (rec.size() == 1 && !rec[0] && decl.columns.size() > 1) continue;
    if (rec.size() != decl.columns.size()) {
      if (findings.size() < limit) {
        findings.push_back(decl.file + ": row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                           " fields, expected " + std::to_string(decl.columns.size()));
      }
      continue;
    }
    Row row(decl.columns.size());
    bool good = true;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const Column& col = decl.columns[target[i]];
      auto v = exchange::convert_field(rec[i], col.type);
      if (!v) {
        good = false;
        if (findings.size() < limit) {
          findings.push_back(decl.file + ": row " + std::to_string(r) + " column " + col.name + ": '" +
                             rec[i].value_or("") + "' is not a valid " + std::string(column_type_name(col.type)));
        }
        continue;
      }
      row[target[i]] = std::move(*v);
    }
    if (good) rows.push_back(std::move(row));
  }
  if (!findings.empty()) return {};
  return rows;
}

std::optional<TableData> read_sqlite(sqlite::Database& db, const std::string& table) {
  auto schema = sqlite_table_schema(db, table);
  if (!schema) return std::nullopt;
  TableData d;
  d.schema = *schema;
  sqlite_read_table(db, table, *schema, 4096, [&](const Schema&, const std::vector<Row>& b) {
    d.rows.insert(d.rows.end(), b.begin(), b.end());
  });
  return d;
}

std::optional<TableData> read_target(LoadTarget& t, const std::string& table) {
  auto schema = t.schema(table);
  if (!schema) return std::nullopt;
  TableData d;
  d.schema = *schema;
  t.read(table, [&](const Schema&, const std::vector<Row>& b) { d.rows.insert(d.rows.end(), b.begin(), b.end()); });
  return d;
}

}  // namespace

struct LoaderEngine::Staging {
  fs::path path;
  sqlite::Database open() const {
    sqlite::Database db(path);
    return db;
  }
};

struct LoaderEngine::Run {
  RunId id = 0;
  Workflow wf;
  std::vector<fs::path> inputs;
  std::shared_ptr<LoadTarget> target;
  RunOptions opts;

  RunState state = RunState::Queued;
  std::vector<NodeReport> nodes;
  std::vector<std::string> completion_order;
  std::vector<std::string> undo_order;
  std::vector<Event> events;
  std::vector<Violation> violations;
  StateDigest digest_before;
  std::optional<StateDigest> digest_after;
  bool unwound = false;
  std::optional<std::string> error;

  bool cancel_requested = false;
  bool cancel_claimed = false;
  bool finished = false;  // execute() returned
  std::map<std::string, UndoAction> undo;

  NodeReport& node(const std::string& id) { return nodes[wf.index_of(id)]; }
  void event(const std::string& node_id, EventType type) {
    events.push_back({static_cast<std::int64_t>(events.size()) + 1, now_ms(), node_id, type});
  }
};

LoaderEngine::LoaderEngine(fs::path staging_db, std::size_t width)
    : staging_path_(std::move(staging_db)), width_(width == 0 ? 1 : width), staging_(new Staging{staging_path_}) {
  if (staging_path_.has_parent_path()) fs::create_directories(staging_path_.parent_path());
  auto db = staging_->open();
  db.exec("PRAGMA journal_mode = WAL");
}

LoaderEngine::~LoaderEngine() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mu_);
    threads.swap(threads_);
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
}

RunId LoaderEngine::start(Workflow wf, std::vector<fs::path> inputs, std::shared_ptr<LoadTarget> target,
                          RunOptions opts) {
  if (!target) fail(ErrorCode::BadRequest, "load target required");
  auto run = std::make_shared<Run>();
  run->wf = std::move(wf);
  run->inputs = std::move(inputs);
  run->target = std::move(target);
  run->opts = std::move(opts);
  for (const auto& n : run->wf.nodes) {
    NodeReport r;
    r.id = n.id;
    r.kind = n.kind;
    run->nodes.push_back(std::move(r));
  }
  std::lock_guard lock(mu_);
  run->id = next_id_++;
  runs_[run->id] = run;
  threads_.emplace_back([this, run] { execute(run); });
  return run->id;
}

RunReport LoaderEngine::run(Workflow wf, std::vector<fs::path> inputs, std::shared_ptr<LoadTarget> target,
                            RunOptions opts) {
  return wait(start(std::move(wf), std::move(inputs), std::move(target), std::move(opts)));
}

std::shared_ptr<LoaderEngine::Run> LoaderEngine::find(RunId id) {
  auto it = runs_.find(id);
  if (it == runs_.end()) fail(ErrorCode::UnknownRun, "no loader run " + std::to_string(id));
  return it->second;
}

RunReport LoaderEngine::snapshot(const Run& r) const {
  RunReport rep;
  rep.run_id = r.id;
  rep.workflow = r.wf.name;
  rep.owner = r.opts.owner;
  rep.target = r.target->describe();
  rep.state = r.state;
  rep.nodes = r.nodes;
  rep.completion_order = r.completion_order;
  rep.undo_order = r.undo_order;
  rep.events = r.events;
  rep.violations = r.violations;
  rep.digest_before = r.digest_before;
  rep.digest_after = r.digest_after;
  rep.unwound = r.unwound;
  rep.error = r.error;
  return rep;
}

RunReport LoaderEngine::wait(RunId id) {
  std::unique_lock lock(mu_);
  auto run = find(id);
  cv_.wait(lock, [&] { return run->finished; });
  return snapshot(*run);
}

RunReport LoaderEngine::report(RunId id) {
  std::lock_guard lock(mu_);
  return snapshot(*find(id));
}

std::vector<RunReport> LoaderEngine::runs() {
  std::lock_guard lock(mu_);
  std::vector<RunReport> out;
  for (const auto& [id, r] : runs_) out.push_back(snapshot(*r));
  return out;
}

void LoaderEngine::request_cancel(RunId id) {
  std::lock_guard lock(mu_);
  find(id)->cancel_requested = true;
  cv_.notify_all();
}

UndoReport LoaderEngine::cancel(RunId id) {
  std::shared_ptr<Run> run;
  {
    std::unique_lock lock(mu_);
    run = find(id);
    if (run->cancel_claimed || (run->finished && run->unwound && !run->cancel_requested)) {
      fail(ErrorCode::AlreadyUnwound, "loader run " + std::to_string(id) + " was already unwound");
    }
    run->cancel_claimed = true;
    run->cancel_requested = true;
    cv_.notify_all();
    cv_.wait(lock, [&] { return run->finished; });
  }
  {
    // A run that finished before the cancel arrived is rolled back here.
    std::lock_guard exec(exec_mu_);
    std::unique_lock lock(mu_);
    if (!run->unwound) {
      unwind(*run, lock);
      run->state = RunState::Cancelled;
      lock.unlock();
      auto after = digest(*run->target);
      lock.lock();
      run->digest_after = after;
    }
  }
  std::lock_guard lock(mu_);
  UndoReport rep;
  rep.run_id = id;
  rep.undone = run->undo_order;
  rep.digest_before = run->digest_before;
  rep.digest_after = run->digest_after.value_or(run->digest_before);
  rep.digest_matches = rep.digest_before == rep.digest_after;
  return rep;
}

StateDigest LoaderEngine::digest(LoadTarget& target) {
  StateDigest d;
  for (const auto& t : target.tables()) {
    if (auto data = read_target(target, t)) {
      d.entries.push_back({"target", t, static_cast<std::int64_t>(data->rows.size()),
                           content_hash(data->schema, data->rows)});
    }
  }
  auto db = staging_->open();
  for (const auto& t : sqlite_user_tables(db)) {
    if (auto data = read_sqlite(db, t)) {
      d.entries.push_back({"staging", t, static_cast<std::int64_t>(data->rows.size()),
                           content_hash(data->schema, data->rows)});
    }
  }
  std::sort(d.entries.begin(), d.entries.end());
  return d;
}

void LoaderEngine::unwind(Run& run, std::unique_lock<std::mutex>& lock) {
  const std::vector<std::string> order(run.completion_order.rbegin(), run.completion_order.rend());
  for (const auto& id : order) {
    const UndoAction action = run.undo[id];
    lock.unlock();
    std::optional<std::string> problem;
    try {
      switch (action.kind) {
        case UndoKind::Nothing:
          break;
        case UndoKind::DropStaging: {
          auto db = staging_->open();
          db.exec("DROP TABLE IF EXISTS " + sqlite::quote_ident(action.table));
          break;
        }
        case UndoKind::DropTarget:
          run.target->drop(action.table);
          break;
        case UndoKind::RemoveRows:
          run.target->remove_rows(action.table, action.rowids);
          break;
        case UndoKind::Sql: {
          auto db = staging_->open();
          sqlite::Transaction txn(db);
          db.exec(action.sql);
          txn.commit();
          break;
        }
      }
    } catch (const std::exception& e) {
      problem = std::string("undo failed: ") + e.what();
    }
    lock.lock();
    NodeReport& n = run.node(id);
    if (problem) {
      n.findings.push_back(*problem);
    } else {
      n.state = NodeState::Undone;
      run.event(id, EventType::Undone);
      run.undo_order.push_back(id);
    }
  }
  run.unwound = true;
}

void LoaderEngine::execute(const std::shared_ptr<Run>& run_ptr) {
  Run& run = *run_ptr;
  std::lock_guard exec(exec_mu_);
  {
    std::lock_guard lock(mu_);
    if (run.cancel_requested) {
      run.state = RunState::Cancelled;
    } else {
      run.state = RunState::Running;
    }
  }
  StateDigest before;
  try {
    before = digest(*run.target);
  } catch (const std::exception& e) {
    std::lock_guard lock(mu_);
    run.state = RunState::Failed;
    run.error = std::string("cannot read target state: ") + e.what();
    run.unwound = true;
    run.finished = true;
    cv_.notify_all();
    return;
  }
  std::unique_lock lock(mu_);
  run.digest_before = before;
  if (run.state == RunState::Cancelled) {
    run.unwound = true;
    run.digest_after = before;
    run.finished = true;
    cv_.notify_all();
    return;
  }

  const RunId rid = run.id;
  auto cancelled = [this, &run] {
    std::lock_guard l(mu_);
    return run.cancel_requested;
  };

  auto perform = [this, &run, rid, cancelled](const NodeSpec& spec) -> Outcome {
    Outcome out;
    auto checkpoint = [&] {
      if (cancelled()) throw Aborted{};
    };
    try {
      checkpoint();
      switch (spec.kind) {
        case StageKind::Check: {
          std::vector<std::string> names = spec.tables;
          if (names.empty()) {
            for (const auto& [n, d] : run.wf.tables) names.push_back(n);
          }
          if (run.inputs.empty()) out.findings.push_back("no input files");
          for (const auto& n : names) {
            if (run.inputs.empty()) break;
            const TableDecl& decl = run.wf.tables.at(n);
            const fs::path* p = find_input(run.inputs, decl.file);
            if (!p) {
              out.findings.push_back("input file " + decl.file + " for table " + n + " is missing");
              continue;
            }
            out.rows += static_cast<std::int64_t>(convert_file(decl, read_file(*p), out.findings).size());
            checkpoint();
          }
          if (!out.findings.empty()) out.ok = false;
          break;
        }
        case StageKind::Load: {
          const TableDecl& decl = run.wf.tables.at(spec.table);
          const fs::path* p = find_input(run.inputs, decl.file);
          if (!p) fail(ErrorCode::NoSuchTable, "input file " + decl.file + " is missing");
          auto rows = convert_file(decl, read_file(*p), out.findings);
          if (!out.findings.empty()) {
            out.ok = false;
            break;
          }
          const std::string name = staging_name(rid, decl.name);
          auto db = staging_->open();
          sqlite::Transaction txn(db);
          if (db.table_exists(name)) fail(ErrorCode::TableExists, "staging table " + name + " exists");
          std::string ddl = "CREATE TABLE " + sqlite::quote_ident(name) + " (";
          for (std::size_t i = 0; i < decl.columns.size(); ++i) {
            ddl += (i ? ", " : "") + sqlite::quote_ident(decl.columns[i].name) + " " +
                   std::string(sqlite::sql_type(decl.columns[i].type));
          }
          db.exec(ddl + ")");
          std::string ins = "INSERT INTO " + sqlite::quote_ident(name) + " VALUES (";
          for (std::size_t i = 0; i < decl.columns.size(); ++i) ins += (i ? ", ?" : "?") + std::to_string(i + 1);
          auto st = db.prepare(ins + ")");
          for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r % 500 == 0) checkpoint();
            st.reset();
            for (std::size_t i = 0; i < rows[r].size(); ++i) st.bind(static_cast<int>(i + 1), rows[r][i]);
            st.run();
          }
          checkpoint();
          txn.commit();
          out.rows = static_cast<std::int64_t>(rows.size());
          out.undo = {UndoKind::DropStaging, name, {}, {}};
          break;
        }
        case StageKind::Validate: {
          auto db = staging_->open();
          auto data = read_sqlite(db, staging_name(rid, spec.table));
          if (!data) fail(ErrorCode::NoSuchTable, "table " + spec.table + " has not been loaded");
          auto lookup = [&](const std::string& t) -> std::optional<TableData> {
            if (auto staged = read_sqlite(db, staging_name(rid, t))) return staged;
            return read_target(*run.target, t);
          };
          auto rep = validate_table(spec.table, *data, spec.rules, lookup);
          out.rows = static_cast<std::int64_t>(data->rows.size());
          for (const auto& v : rep.violations) out.findings.push_back(std::string(rule_name(v.rule)) + ": " + v.message);
          out.violations = std::move(rep.violations);
          out.ok = out.violations.empty();
          break;
        }
        case StageKind::Publish: {
          auto db = staging_->open();
          auto data = read_sqlite(db, staging_name(rid, spec.table));
          if (!data) fail(ErrorCode::NoSuchTable, "table " + spec.table + " has not been loaded");
          checkpoint();
          const std::string& dest = spec.publish_as;
          if (auto existing = run.target->schema(dest)) {
            if (existing->size() != data->schema.size()) {
              fail(ErrorCode::ArityMismatch, "target table " + dest + " has " + std::to_string(existing->size()) +
                                                 " columns, staged data has " + std::to_string(data->schema.size()));
            }
            auto ids = run.target->append(dest, data->rows);
            out.undo = {UndoKind::RemoveRows, dest, std::move(ids), {}};
          } else {
            run.target->create(dest, data->schema, data->rows);
            out.undo = {UndoKind::DropTarget, dest, {}, {}};
          }
          out.rows = static_cast<std::int64_t>(data->rows.size());
          break;
        }
        case StageKind::Custom: {
          auto db = staging_->open();
          sqlite::Transaction txn(db);
          db.exec(substitute(spec.sql, rid));
          checkpoint();
          txn.commit();
          out.undo = {UndoKind::Sql, {}, {}, substitute(spec.undo_sql, rid)};
          break;
        }
      }
    } catch (const Aborted&) {
      out = Outcome{};
      out.aborted = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
    return out;
  };

  std::vector<std::thread> workers;
  std::size_t running = 0;
  bool failed = false;
  while (true) {
    if (!run.cancel_requested && !failed) {
      for (const auto& id : run.wf.order) {
        if (running >= width_) break;
        NodeReport& n = run.node(id);
        if (n.state != NodeState::Pending) continue;
        const NodeSpec& spec = run.wf.node(id);
        const bool ready = std::all_of(spec.deps.begin(), spec.deps.end(),
                                       [&](const std::string& d) { return run.node(d).state == NodeState::Done; });
        if (!ready) continue;
        n.state = NodeState::Running;
        n.started_at = now_ms();
        run.event(id, EventType::Started);
        ++running;
        workers.emplace_back([this, &run, &running, &failed, &spec, perform] {
          Outcome out = perform(spec);
          std::function<void(const std::string&, std::size_t)> hook;
          std::size_t done_count = 0;
          {
            std::lock_guard l(mu_);
            NodeReport& n = run.node(spec.id);
            n.finished_at = now_ms();
            n.rows = out.rows;
            n.findings.insert(n.findings.end(), out.findings.begin(), out.findings.end());
            run.violations.insert(run.violations.end(), out.violations.begin(), out.violations.end());
            if (out.aborted) {
              n.state = NodeState::Pending;
              n.started_at.reset();
              n.finished_at.reset();
              run.event(spec.id, EventType::Aborted);
            } else if (out.ok) {
              n.state = NodeState::Done;
              run.completion_order.push_back(spec.id);
              run.undo[spec.id] = out.undo;
              run.event(spec.id, EventType::Done);
              hook = run.opts.on_node_done;
              done_count = run.completion_order.size();
            } else {
              n.state = NodeState::Failed;
              n.error = out.error ? *out.error : "stage " + std::string(stage_name(spec.kind)) + " reported findings";
              run.event(spec.id, EventType::Failed);
              failed = true;
              if (!run.error) run.error = "node " + spec.id + " failed: " + *n.error;
            }
          }
          if (hook) hook(spec.id, done_count);
          std::lock_guard l(mu_);
          --running;
          cv_.notify_all();
        });
      }
    }
    if (running == 0) {
      const bool more = !run.cancel_requested && !failed &&
                        std::any_of(run.nodes.begin(), run.nodes.end(),
                                    [](const NodeReport& n) { return n.state == NodeState::Pending; });
      if (!more) break;
      // Pending nodes remain but none is ready: unreachable for a valid DAG.
      bool ready_exists = false;
      for (const auto& id : run.wf.order) {
        const NodeSpec& spec = run.wf.node(id);
        if (run.node(id).state != NodeState::Pending) continue;
        if (std::all_of(spec.deps.begin(), spec.deps.end(),
                        [&](const std::string& d) { return run.node(d).state == NodeState::Done; })) {
          ready_exists = true;
        }
      }
      if (!ready_exists) break;
      continue;
    }
    cv_.wait(lock);
  }
  lock.unlock();
  for (auto& w : workers) w.join();
  lock.lock();

  if (failed || run.cancel_requested) {
    unwind(run, lock);
    run.state = failed ? RunState::Failed : RunState::Cancelled;
    lock.unlock();
    StateDigest after;
    try {
      after = digest(*run.target);
    } catch (const std::exception&) {
    }
    lock.lock();
    run.digest_after = after;
  } else {
    run.state = RunState::Succeeded;
  }
  run.finished = true;
  cv_.notify_all();
}

}  // namespace casq::loader

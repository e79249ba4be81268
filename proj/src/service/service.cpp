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

#include "casq/service/service.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "casq/core/error.hpp"
#include "casq/core/sqlite.hpp"
#include "casq/exchange/file_sink.hpp"
#include "casq/exchange/import.hpp"
#include "casq/federation/client.hpp"
#include "casq/loader/target.hpp"
#include "casq/loader/workflow.hpp"
#include "casq/scheduler/suggest.hpp"
#include "casq/scheduler/workload.hpp"
#include "casq/service/views.hpp"
#include "casq/sqlrewrite/classify.hpp"
#include "casq/sqlrewrite/rewrite.hpp"

namespace casq::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string& require_string(const json& body, const char* key) {
  if (!body.is_object()) fail(ErrorCode::BadRequest, "request body must be a JSON object");
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) fail(ErrorCode::BadRequest, std::string("missing string field '") + key + "'");
  return it->get_ref<const std::string&>();
}

std::optional<std::string> optional_string(const json& body, const char* key) {
  if (!body.is_object()) return std::nullopt;
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(ErrorCode::BadRequest, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

bool optional_bool(const json& body, const char* key, bool fallback) {
  if (!body.is_object()) return fallback;
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) fail(ErrorCode::BadRequest, std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

Config prepared(Config c) {
  fs::create_directories(c.data_dir);
  for (const fs::path& p : {c.mydb_root, c.files_dir, c.loader_dir}) fs::create_directories(c.resolve(p));
  fs::create_directories(c.resolve(c.store_path).parent_path());
  const fs::path catalog = c.resolve(c.catalog_path);
  if (!fs::exists(catalog)) {
    fs::create_directories(catalog.parent_path());
    sqlite::Database db(catalog);  // an empty public catalog
  }
  return c;
}

federation::NodeIdentity load_identity(const Config& c) {
  federation::NodeIdentity id = [&] {
    if (!c.key_seed_hex.empty()) return federation::NodeIdentity::from_seed_hex(c.node_id, c.key_seed_hex);
    const fs::path key_file = c.data_dir / "node.key";
    if (fs::exists(key_file)) {
      std::ifstream in(key_file);
      std::string hex;
      in >> hex;
      return federation::NodeIdentity::from_seed_hex(c.node_id, hex);
    }
    auto fresh = federation::NodeIdentity::generate(c.node_id);
    {
      std::ofstream out(key_file);
      out << fresh.seed_hex() << "\n";
    }
    fs::permissions(key_file, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
    return fresh;
  }();
  for (const auto& t : c.trust) id.trust_hex(t.node, t.public_key_hex);
  return id;
}

// Streams rows into a new MyDB table; nothing is visible until finish.
class MyDbSink : public scheduler::ResultSink {
 public:
  MyDbSink(mydb::MyDbManager& mydb, std::string user, std::string table)
      : mydb_(mydb), user_(std::move(user)), table_(std::move(table)) {}

  void on_schema(const Schema& schema) override { writer_.emplace(mydb_.create_table(user_, table_, schema)); }
  void on_batch(const std::vector<Row>& rows) override { writer_->append(rows); }
  std::optional<std::string> finish() override {
    if (writer_) writer_->commit();
    return std::nullopt;
  }
  void abort() override {
    if (writer_) writer_->abort();
  }

 private:
  mydb::MyDbManager& mydb_;
  std::string user_;
  std::string table_;
  std::optional<mydb::TableWriter> writer_;
};

// Writes the full result as CSV and keeps the first rows for the
// synchronous short-queue response.
class ReturnRowsSink : public scheduler::ResultSink {
 public:
  ReturnRowsSink(exchange::FileStore& files, InlineResults& results, JobId id)
      : file_(files, exchange::ExportFormat::Csv, "result"), results_(results), id_(id) {}

  void on_schema(const Schema& schema) override {
    file_.on_schema(schema);
    entry_.schema = schema;
  }
  void on_batch(const std::vector<Row>& rows) override {
    file_.on_batch(rows);
    for (const auto& r : rows) {
      if (entry_.rows.size() >= kInlineRowLimit) {
        entry_.truncated = true;
        break;
      }
      entry_.rows.push_back(r);
    }
  }
  std::optional<std::string> finish() override {
    auto url = file_.finish();
    results_.put(id_, std::move(entry_));
    return url;
  }
  void abort() override { file_.abort(); }

 private:
  exchange::FileSink file_;
  InlineResults& results_;
  JobId id_;
  InlineResults::Entry entry_;
};

}  // namespace

void InlineResults::put(JobId id, Entry e) {
  std::lock_guard lock(mu_);
  entries_[id] = std::move(e);
  while (entries_.size() > 64) entries_.erase(entries_.begin());
}

std::optional<InlineResults::Entry> InlineResults::take(JobId id) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  Entry e = std::move(it->second);
  entries_.erase(it);
  return e;
}

class Service::Environment : public scheduler::JobEnvironment {
 public:
  explicit Environment(Service& s) : s_(s) {}

  scheduler::ExecutionRequest prepare(const JobRecord& job) override {
    const std::string rewritten = sqlrewrite::rewrite(job.query_text, job.user_id, s_.catalog_);
    scheduler::ExecutionRequest req;
    req.physical_query = sqlrewrite::prepare_for_backend(rewritten);
    req.mydb_users = sqlrewrite::physical_databases(req.physical_query);
    if (s_.wheels_) {
      const auto cls = sqlrewrite::classify(job.query_text, s_.config_.indexed);
      const auto pub = cls.public_tables();
      if (cls.full_scan_candidate && pub.size() == 1 && cls.refs.size() == 1) req.wheel_table = pub.front();
    }
    return req;
  }

  std::unique_ptr<scheduler::ResultSink> open_sink(const JobRecord& job) override {
    switch (job.target.kind) {
      case TargetKind::IntoMyDb:
        return std::make_unique<MyDbSink>(s_.mydb_, job.user_id, job.target.table);
      case TargetKind::ReturnRows:
        return std::make_unique<ReturnRowsSink>(s_.files_, s_.inline_, job.job_id);
      case TargetKind::ExtractFile:
        break;
    }
    fail(ErrorCode::BadRequest, "extraction jobs do not run in query queues");
  }

 private:
  Service& s_;
};

Service::Service(Config config)
    : config_(prepared(std::move(config))),
      store_(config_.resolve(config_.store_path), QueueSet(config_.queues), config_.default_quota_bytes),
      mydb_(store_, config_.resolve(config_.mydb_root)),
      groups_(store_, mydb_),
      catalog_(mydb_, groups_),
      files_(config_.resolve(config_.files_dir), config_.files_ttl_days),
      identity_(load_identity(config_)) {
  const fs::path catalog = config_.resolve(config_.catalog_path);
  if (config_.wheel_enabled) {
    wheels_ = std::make_unique<wheel::WheelRegistry>(catalog, config_.wheel_block_rows, config_.wheel_entry_points);
  }
  backend_ = std::make_unique<scheduler::SqliteBackend>(scheduler::SqliteBackendOptions{
      .catalog = catalog, .mydb_root = config_.resolve(config_.mydb_root), .wheels = wheels_.get()});
  env_ = std::make_unique<Environment>(*this);
  scheduler_ = std::make_unique<scheduler::Scheduler>(store_, *env_, *backend_, scheduler::SchedulerOptions{.start = false});
  extraction_ = std::make_unique<exchange::ExtractionProcessor>(store_, mydb_, groups_, files_, config_.extract_workers);
  loader_ = std::make_unique<loader::LoaderEngine>(config_.resolve(config_.loader_dir) / "staging.db",
                                                   config_.loader_width);
  seed_users();
}

Service::~Service() { stop(); }

void Service::seed_users() {
  for (const auto& u : config_.users) {
    if (auto existing = store_.find_user(u.id)) {
      if (u.quota_bytes && existing->quota_bytes != *u.quota_bytes) store_.set_quota(u.id, *u.quota_bytes);
      continue;
    }
    if (u.password) {
      store_.create_user(u.id, std::string_view(*u.password), u.quota_bytes);
    } else {
      store_.create_user(u.id, std::nullopt, u.quota_bytes);
    }
  }
}

void Service::start() {
  if (started_) return;
  started_ = true;
  store_.recover_orphans();
  files_.sweep();
  for (const JobRecord& job : store_.active_jobs()) {
    if (job.queue == kExtractQueue) {
      extraction_->submit(job.job_id);
    } else {
      scheduler_->submit(job.job_id);
    }
  }
  scheduler_->start();
}

void Service::stop() {
  if (scheduler_) scheduler_->stop();
  if (extraction_) extraction_->stop();
}

std::string Service::authenticate(std::string_view header) {
  constexpr std::string_view kBearer = "Bearer ";
  if (header.size() <= kBearer.size() || header.substr(0, kBearer.size()) != kBearer) {
    fail(ErrorCode::Unauthenticated, "a bearer token is required");
  }
  const auto principal = federation::verify_token(header.substr(kBearer.size()), identity_, now_ms());
  return federation::local_user(store_, principal);
}

std::string Service::issue_token(const std::string& user) {
  return federation::issue_token(identity_, user, config_.token_ttl_s, now_ms()).encode();
}

ApiResult Service::login(const json& body) {
  const std::string& user = require_string(body, "user");
  const std::string& password = require_string(body, "password");
  const auto token = federation::login(store_, identity_, user, password, config_.token_ttl_s);
  return {200,
          {{"token", token.encode()},
           {"user_id", token.subject},
           {"node_id", token.issuer},
           {"expires_at", token.expires_at}}};
}

ApiResult Service::identity_info() {
  return {200, {{"node_id", identity_.node_id()}, {"public_key", identity_.public_key_hex()}}};
}

JobRecord Service::owned_job(const std::string& user, JobId id) {
  JobRecord job = store_.get_job(id);
  if (job.user_id != user) fail(ErrorCode::NotOwner, "job " + std::to_string(id) + " belongs to another user");
  return job;
}

ApiResult Service::submit_job(const std::string& user, const json& body) {
  const std::string& query = require_string(body, "query");
  store_.get_user(user);
  const auto cls = sqlrewrite::classify(query, config_.indexed);
  sqlrewrite::rewrite(query, user, catalog_);
  const std::string suggested = scheduler::suggest_queue(cls.fingerprint, store_);
  const std::string queue = optional_string(body, "queue").value_or(suggested);

  NewJob job;
  job.user_id = user;
  job.query_text = query;
  job.queue = queue;
  job.autocomplete = optional_bool(body, "autocomplete", false);
  job.fingerprint = cls.fingerprint;
  if (cls.into_target) {
    const std::string table = mydb::normalize_table_name(*cls.into_target);
    if (mydb_.table_exists(user, table)) fail(ErrorCode::TableExists, "MyDB already has a table named " + table);
    job.target = JobTarget::into_mydb(table);
  }
  mydb_.ensure_mydb(user);
  const auto sub = scheduler_->create_and_submit(job);

  json out = {{"job_id", sub.job.job_id},
              {"position", sub.position},
              {"queue", sub.job.queue},
              {"suggested_queue", suggested},
              {"state", std::string(state_name(sub.job.state))}};
  const QueueSpec& spec = store_.queues().get(queue);
  if (queue != store_.queues().shortest().name || job.target.kind != TargetKind::ReturnRows) return {202, out};

  const auto limit = std::chrono::milliseconds(static_cast<std::int64_t>(spec.time_limit_s * 1050)) +
                     std::chrono::seconds(5);
  const auto done = scheduler_->wait(sub.job.job_id, limit);
  if (!done) return {202, out};
  out["state"] = std::string(state_name(done->state));
  out["job"] = to_json(*done);
  if (auto rows = inline_.take(done->job_id)) {
    out["columns"] = to_json(rows->schema);
    json data = json::array();
    for (const auto& r : rows->rows) {
      json row = json::array();
      for (const auto& v : r) row.push_back(to_json(v));
      data.push_back(std::move(row));
    }
    out["rows"] = std::move(data);
    out["truncated"] = rows->truncated;
  }
  return {200, out};
}

ApiResult Service::job_status(const std::string& user, JobId id) {
  const JobRecord job = owned_job(user, id);
  json out = to_json(job);
  if (job.queue != kExtractQueue) {
    if (auto pos = scheduler_->position(id)) out["position"] = *pos;
  }
  return {200, out};
}

ApiResult Service::list_jobs(const std::string& user, const JobQuery& q) {
  JobFilter f;
  if (q.state) {
    f.state = parse_state(*q.state);
    if (!f.state) fail(ErrorCode::BadRequest, "unknown job state '" + *q.state + "'");
  }
  if (q.queue) f.queue = *q.queue;
  f.submitted_from = q.from;
  f.submitted_to = q.to;
  json jobs = json::array();
  for (const auto& j : store_.list_jobs(user, f)) jobs.push_back(to_json(j));
  return {200, {{"jobs", std::move(jobs)}}};
}

ApiResult Service::resubmit_job(const std::string& user, JobId id) {
  const JobRecord job = owned_job(user, id);
  if (job.queue == kExtractQueue) {
    const JobRecord child = store_.resubmit(id);
    extraction_->submit(child.job_id);
    return {202, {{"job_id", child.job_id}, {"position", 0}, {"job", to_json(child)}}};
  }
  const auto sub = scheduler_->resubmit(id);
  return {202, {{"job_id", sub.job.job_id}, {"position", sub.position}, {"job", to_json(sub.job)}}};
}

ApiResult Service::cancel_job(const std::string& user, JobId id) {
  const JobRecord job = owned_job(user, id);
  if (is_terminal(job.state)) {
    fail(ErrorCode::IllegalTransition, "job " + std::to_string(id) + " is already " + std::string(state_name(job.state)));
  }
  std::optional<JobRecord> done;
  if (job.queue == kExtractQueue) {
    extraction_->cancel(id);
    done = extraction_->wait(id, std::chrono::seconds(5));
  } else {
    scheduler_->cancel(id);
    done = scheduler_->wait(id, std::chrono::seconds(5));
  }
  return {200, to_json(done ? *done : store_.get_job(id))};
}

ApiResult Service::list_tables(const std::string& user) {
  store_.get_user(user);
  const auto info = mydb_.ensure_mydb(user);
  json tables = json::array();
  for (const auto& [name, t] : info.tables) tables.push_back(to_json(t));
  return {200,
          {{"user_id", info.user_id},
           {"used_bytes", info.used_bytes},
           {"quota_bytes", info.quota_bytes},
           {"tables", std::move(tables)}}};
}

ApiResult Service::create_table(const std::string& user, const json& body) {
  const std::string& name = require_string(body, "name");
  auto cols = body.find("columns");
  if (cols == body.end() || !cols->is_array() || cols->empty()) {
    fail(ErrorCode::BadRequest, "columns must be a non-empty array of {name, type}");
  }
  Schema schema;
  for (const auto& c : *cols) {
    const std::string& type = require_string(c, "type");
    auto t = parse_column_type(type);
    if (!t) fail(ErrorCode::BadRequest, "unknown column type '" + type + "'");
    schema.push_back({require_string(c, "name"), *t});
  }
  mydb_.ensure_mydb(user);
  auto writer = mydb_.create_table(user, name, schema);
  return {201, to_json(writer.commit())};
}

ApiResult Service::drop_table(const std::string& user, const std::string& table) {
  const std::int64_t freed = mydb_.drop_table(user, table);
  return {200, {{"table", mydb::normalize_table_name(table)}, {"freed_bytes", freed}}};
}

ApiResult Service::upload_rows(const std::string& user, const std::string& table, std::string_view csv) {
  const auto r = exchange::import_csv(mydb_, user, table, csv);
  return {200, {{"rows", r.rows}, {"table", to_json(r.table)}}};
}

ApiResult Service::export_table(const std::string& user, const json& body) {
  exchange::ExportRequest req;
  req.user_id = user;
  req.table = require_string(body, "table");
  req.format = optional_string(body, "format").value_or("csv");
  const JobRecord job = extraction_->enqueue_export(req);
  return {202, {{"job_id", job.job_id}, {"job", to_json(job)}}};
}

exchange::FileArtifact Service::file_for(const std::string& user, const std::string& digest) {
  auto artifact = files_.find(digest);
  if (!artifact) fail(ErrorCode::NotFound, "no file " + digest);
  for (const auto& j : store_.list_jobs(user)) {
    if (j.output_url == artifact->url) return *artifact;
  }
  fail(ErrorCode::NotFound, "no file " + digest);
}

ApiResult Service::create_group(const std::string& user, const json& body) {
  return {201, to_json(groups_.create_group(user, require_string(body, "name")))};
}

ApiResult Service::list_groups(const std::string& user) {
  json out = json::array();
  for (const auto& g : groups_.groups_of(user)) out.push_back(to_json(g));
  return {200, {{"groups", std::move(out)}}};
}

ApiResult Service::invite(const std::string& user, std::int64_t group_id, const json& body) {
  return {200, to_json(groups_.invite(group_id, user, require_string(body, "user")))};
}

ApiResult Service::accept(const std::string& user, std::int64_t group_id) {
  return {200, to_json(groups_.accept(group_id, user))};
}

ApiResult Service::publish(const std::string& user, std::int64_t group_id, const json& body) {
  return {200, to_json(groups_.publish(user, require_string(body, "table"), group_id))};
}

ApiResult Service::federation_space(const std::string& user) {
  return {200, federation::to_json(federation::space_summary(identity_.node_id(), user, store_, mydb_))};
}

federation::TableDump Service::federation_table(const std::string& user, const std::string& owner,
                                                const std::string& table) {
  return federation::dump_table(user, owner, table, mydb_, groups_);
}

ApiResult Service::federation_fetch(const std::string& user, const std::string& bearer, const json& body) {
  const std::string& node = require_string(body, "node");
  const std::string& table = require_string(body, "table");
  const std::string owner = optional_string(body, "owner").value_or(user);
  const std::string local = optional_string(body, "as").value_or(table);
  std::optional<federation::Endpoint> ep;
  for (const auto& p : config_.peers) {
    if (p.name == node) ep = federation::Endpoint{p.name, p.url};
  }
  if (!ep && (node.rfind("http://", 0) == 0 || node.rfind("https://", 0) == 0)) ep = federation::Endpoint{node, node};
  if (!ep) fail(ErrorCode::NotFound, "unknown peer '" + node + "'");
  mydb_.ensure_mydb(user);
  const auto info = federation::fetch_remote_table(bearer, *ep, owner, table, mydb_, user, local);
  return {201, to_json(info)};
}

ApiResult Service::federation_spaces(const std::string& user, const std::string& bearer) {
  json out = json::array();
  out.push_back({{"node", identity_.node_id()},
                 {"url", config_.self_url()},
                 {"ok", true},
                 {"summary", federation::to_json(federation::space_summary(identity_.node_id(), user, store_, mydb_))}});
  std::vector<federation::Endpoint> peers;
  for (const auto& p : config_.peers) peers.push_back({p.name, p.url});
  for (const auto& r : federation::list_spaces(bearer, peers)) {
    json e = {{"node", r.node.name}, {"url", r.node.url}, {"ok", r.summary.has_value()}};
    if (r.summary) {
      e["summary"] = federation::to_json(*r.summary);
    } else {
      e["error"] = {{"code", r.error_code.value_or("TransferFailed")}, {"message", r.error_message.value_or("")}};
    }
    out.push_back(std::move(e));
  }
  return {200, {{"spaces", std::move(out)}}};
}

ApiResult Service::simulate(const json& body) {
  if (!body.is_object()) fail(ErrorCode::BadRequest, "request body must be a JSON object");
  const auto n = body.value("n", std::size_t{100000});
  const double alpha = body.value("alpha", 2.0);
  const auto seed = body.value("seed", std::uint64_t{1});
  const double min_duration = body.value("min_duration", 1.0);
  const auto bins = body.value("bins", std::size_t{30});
  if (n > 10'000'000) fail(ErrorCode::BadRequest, "n must be at most 10000000");
  if (bins < 2) fail(ErrorCode::BadRequest, "bins must be at least 2");
  const auto samples = scheduler::generate_workload(n, alpha, seed, min_duration);
  std::vector<double> durations;
  durations.reserve(samples.size());
  for (const auto& s : samples) durations.push_back(s.duration);
  const auto fit = scheduler::fit_power_law(durations, bins);
  json out = {{"n", n},
              {"alpha", alpha},
              {"seed", seed},
              {"median_duration", scheduler::median(durations)},
              {"max_duration", *std::max_element(durations.begin(), durations.end())},
              {"fit", {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared},
                       {"bins_used", fit.bins_used}}}};
  if (body.value("include_samples", false)) {
    json rows = json::array();
    for (const auto& s : samples) rows.push_back({{"duration", s.duration}, {"rows", s.rows}, {"cpu", s.cpu}});
    out["samples"] = std::move(rows);
  }
  return {200, out};
}

ApiResult Service::wheel_stats() {
  json wheels = json::array();
  if (wheels_) {
    for (const auto& s : wheels_->stats()) wheels.push_back(to_json(s));
  }
  return {200, {{"enabled", wheels_ != nullptr}, {"wheels", std::move(wheels)}}};
}

ApiResult Service::queues() {
  json out = json::array();
  const auto stats = scheduler_->stats();
  for (const auto& q : store_.queues().all()) {
    json e = to_json(q);
    for (const auto& s : stats) {
      if (s.name != q.name) continue;
      e["waiting"] = s.waiting;
      e["running"] = s.running;
      e["started"] = s.started;
      e["finished"] = s.finished;
    }
    out.push_back(std::move(e));
  }
  return {200, {{"queues", std::move(out)}, {"extract_queue", std::string(kExtractQueue)}}};
}

ApiResult Service::ui_config() {
  json qs = json::array();
  for (const auto& q : store_.queues().all()) qs.push_back(to_json(q));
  return {200,
          {{"api_base", "/v1"},
           {"node_id", identity_.node_id()},
           {"poll_interval_ms", config_.ui_poll_interval_ms},
           {"default_quota_bytes", config_.default_quota_bytes},
           {"queues", std::move(qs)},
           {"export_formats", {"csv", "votable"}},
           {"peers", [&] {
              json p = json::array();
              for (const auto& e : config_.peers) p.push_back({{"name", e.name}, {"url", e.url}});
              return p;
            }()}}};
}

loader::RunReport Service::owned_run(const std::string& user, loader::RunId id) {
  auto r = loader_->report(id);
  if (r.owner != user) fail(ErrorCode::NotOwner, "run " + std::to_string(id) + " belongs to another user");
  return r;
}

ApiResult Service::start_load(const std::string& user, const json& body) {
  if (!body.is_object() || !body.contains("workflow")) fail(ErrorCode::BadRequest, "missing field 'workflow'");
  const json& w = body["workflow"];
  loader::Workflow wf = loader::parse_workflow(w.is_string() ? w.get<std::string>() : w.dump());

  store_.get_user(user);
  mydb_.ensure_mydb(user);
  const fs::path dir = config_.resolve(config_.loader_dir) / "inputs" /
                       (user + "-" + std::to_string(now_ms()) + "-" + std::to_string(upload_seq_++));
  fs::create_directories(dir);
  std::vector<fs::path> inputs;
  if (auto it = body.find("inputs"); it != body.end() && !it->is_null()) {
    if (!it->is_object()) fail(ErrorCode::BadRequest, "inputs must map file names to CSV text");
    for (const auto& [name, text] : it->items()) {
      const fs::path p(name);
      if (name.empty() || p.filename() != p || name == "." || name == "..") {
        fail(ErrorCode::BadRequest, "input name '" + name + "' must be a plain file name");
      }
      if (!text.is_string()) fail(ErrorCode::BadRequest, "input '" + name + "' must be CSV text");
      std::ofstream out(dir / p, std::ios::binary);
      out << text.get_ref<const std::string&>();
      inputs.push_back(dir / p);
    }
  }
  auto target = std::make_shared<loader::MyDbLoadTarget>(mydb_, user);
  const auto id = loader_->start(std::move(wf), std::move(inputs), target, loader::RunOptions{.owner = user});
  return {202, {{"run_id", id}}};
}

ApiResult Service::load_runs(const std::string& user) {
  json out = json::array();
  for (const auto& r : loader_->runs()) {
    if (r.owner != user) continue;
    out.push_back({{"run_id", r.run_id},
                   {"workflow", r.workflow},
                   {"state", std::string(loader::run_state_name(r.state))},
                   {"unwound", r.unwound}});
  }
  return {200, {{"runs", std::move(out)}}};
}

ApiResult Service::load_run(const std::string& user, loader::RunId id) {
  return {200, to_json(owned_run(user, id))};
}

ApiResult Service::cancel_load(const std::string& user, loader::RunId id) {
  owned_run(user, id);
  return {200, to_json(loader_->cancel(id))};
}

}  // namespace casq::service

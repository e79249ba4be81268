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

// casq: server and command-line client.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "casq/core/error.hpp"
#include "casq/federation/token.hpp"
#include "casq/service/api_client.hpp"
#include "casq/service/server.hpp"
#include "casq/service/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using casq::service::ApiClient;

namespace {

struct Session {
  std::string url = "http://127.0.0.1:8080";
  std::string token;
};

fs::path session_file() {
  if (const char* p = std::getenv("CASQ_SESSION")) return p;
  const char* home = std::getenv("HOME");
  return fs::path(home != nullptr ? home : ".") / ".casq-session.json";
}

Session load_session() {
  Session s;
  if (std::ifstream in(session_file()); in) {
    try {
      const json j = json::parse(in);
      s.url = j.value("url", s.url);
      s.token = j.value("token", "");
    } catch (const json::exception&) {
    }
  }
  if (const char* u = std::getenv("CASQ_URL")) s.url = u;
  if (const char* t = std::getenv("CASQ_TOKEN")) s.token = t;
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) casq::fail(casq::ErrorCode::NotFound, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

json wait_for_job(const ApiClient& api, std::int64_t id) {
  const std::string path = "/v1/jobs/" + std::to_string(id);
  while (true) {
    json j = api.get(path);
    const std::string st = j.at("state");
    if (st != "SUBMITTED" && st != "STARTED") return j;
    std::this_thread::sleep_for(std::chrono::milliseconds(250));
  }
}

int serve(const std::string& config_path, int port_override) {
  auto config = config_path.empty() ? casq::service::Config{} : casq::service::Config::load(config_path);
  if (port_override > 0) config.listen_port = port_override;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  casq::service::Service service(config);
  service.start();
  casq::service::HttpServer server(service);
  const int port = server.start(config.listen_host, config.listen_port);
  std::cerr << "casq node " << service.identity().node_id() << " listening on " << config.listen_host << ":" << port
            << "\npublic key " << service.identity().public_key_hex() << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "shutting down" << std::endl;
  server.stop();
  service.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"casq: batch query jobs over a shared catalog"};
  app.require_subcommand(1);
  Session session = load_session();
  app.add_option("--url", session.url, "server URL (env CASQ_URL)");
  app.add_option("--token", session.token, "bearer token (env CASQ_TOKEN)");

  std::string config_path;
  int port = 0;
  auto* serve_cmd = app.add_subcommand("serve", "run a server");
  serve_cmd->add_option("-c,--config", config_path, "JSON configuration file");
  serve_cmd->add_option("-p,--port", port, "listen port (overrides the config)");

  std::string user, password;
  auto* login_cmd = app.add_subcommand("login", "log in and remember the session");
  login_cmd->add_option("user", user)->required();
  login_cmd->add_option("password", password)->required();

  std::string query, query_file, queue;
  bool autocomplete = false, wait = false;
  auto* submit_cmd = app.add_subcommand("submit", "submit a query job");
  submit_cmd->add_option("query", query, "SQL text");
  submit_cmd->add_option("-f,--file", query_file, "read the query from a file");
  submit_cmd->add_option("-q,--queue", queue, "queue name (default: suggested)");
  submit_cmd->add_flag("-a,--autocomplete", autocomplete, "promote to the next queue on timeout");
  submit_cmd->add_flag("-w,--wait", wait, "wait for queued jobs to finish");

  std::int64_t job_id = 0;
  auto* status_cmd = app.add_subcommand("status", "show one job");
  status_cmd->add_option("job", job_id)->required();
  auto* cancel_cmd = app.add_subcommand("cancel", "cancel a job");
  cancel_cmd->add_option("job", job_id)->required();
  auto* resubmit_cmd = app.add_subcommand("resubmit", "run a finished job again");
  resubmit_cmd->add_option("job", job_id)->required();

  std::string state;
  auto* jobs_cmd = app.add_subcommand("jobs", "list your jobs");
  jobs_cmd->add_option("--state", state);
  jobs_cmd->add_option("--queue", queue);

  app.add_subcommand("tables", "list MyDB tables and quota use");
  std::string table;
  auto* drop_cmd = app.add_subcommand("drop", "drop a MyDB table");
  drop_cmd->add_option("table", table)->required();

  std::string file, create_spec;
  auto* upload_cmd = app.add_subcommand("upload", "append a CSV file to a MyDB table");
  upload_cmd->add_option("table", table)->required();
  upload_cmd->add_option("file", file)->required();
  upload_cmd->add_option("--create", create_spec, "create the table first: name:type,name:type");

  std::string format = "csv", out;
  auto* export_cmd = app.add_subcommand("export", "export a table to a file");
  export_cmd->add_option("table", table)->required();
  export_cmd->add_option("--format", format, "csv or votable");
  export_cmd->add_option("-o,--out", out, "download to this path when done");

  auto* groups_cmd = app.add_subcommand("groups", "list and manage groups");
  std::string group_name, member;
  std::int64_t group_id = 0;
  auto* g_create = groups_cmd->add_subcommand("create");
  g_create->add_option("name", group_name)->required();
  auto* g_invite = groups_cmd->add_subcommand("invite");
  g_invite->add_option("group", group_id)->required();
  g_invite->add_option("user", member)->required();
  auto* g_accept = groups_cmd->add_subcommand("accept");
  g_accept->add_option("group", group_id)->required();
  auto* g_publish = groups_cmd->add_subcommand("publish");
  g_publish->add_option("group", group_id)->required();
  g_publish->add_option("table", table)->required();

  auto* load_cmd = app.add_subcommand("load", "run and inspect loader workflows");
  std::string workflow;
  std::vector<std::string> inputs;
  std::int64_t run_id = 0;
  auto* l_run = load_cmd->add_subcommand("run");
  l_run->add_option("workflow", workflow, "workflow JSON file")->required();
  l_run->add_option("inputs", inputs, "CSV input files");
  l_run->add_flag("-w,--wait", wait);
  auto* l_status = load_cmd->add_subcommand("status");
  l_status->add_option("run", run_id)->required();
  auto* l_cancel = load_cmd->add_subcommand("cancel");
  l_cancel->add_option("run", run_id)->required();
  load_cmd->add_subcommand("list");

  std::size_t n = 100000;
  double alpha = 2.0;
  std::uint64_t seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "sample the synthetic workload and fit its power law");
  sim_cmd->add_option("-n", n);
  sim_cmd->add_option("--alpha", alpha);
  sim_cmd->add_option("--seed", seed);

  auto* fed_cmd = app.add_subcommand("federation", "federated MyDB access");
  bool all_nodes = false;
  auto* f_space = fed_cmd->add_subcommand("space", "what you hold on this node (or every peer)");
  f_space->add_flag("--all", all_nodes);
  std::string node, owner, local_name;
  auto* f_fetch = fed_cmd->add_subcommand("fetch", "copy a table from a peer into your MyDB");
  f_fetch->add_option("node", node)->required();
  f_fetch->add_option("table", table)->required();
  f_fetch->add_option("--owner", owner);
  f_fetch->add_option("--as", local_name);

  app.add_subcommand("keygen", "print a new node key seed and its public key");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(config_path, port);
    if (app.got_subcommand("keygen")) {
      auto id = casq::federation::NodeIdentity::generate("new");
      print({{"key_seed", id.seed_hex()}, {"public_key", id.public_key_hex()}});
      return 0;
    }

    ApiClient api(session.url, session.token);
    if (*login_cmd) {
      const json r = api.login(user, password);
      std::ofstream(session_file()) << json{{"url", session.url}, {"token", api.token()}}.dump() << "\n";
      fs::permissions(session_file(), fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
      std::cout << "logged in as " << r.at("user_id").get<std::string>() << " at " << r.at("node_id").get<std::string>()
                << "\n";
    } else if (*submit_cmd) {
      if (!query_file.empty()) query = read_file(query_file);
      if (query.empty()) casq::fail(casq::ErrorCode::EmptyQuery, "no query given");
      json body = {{"query", query}, {"autocomplete", autocomplete}};
      if (!queue.empty()) body["queue"] = queue;
      json r = api.post("/v1/jobs", body);
      if (!queue.empty() && r.at("suggested_queue") != queue) {
        std::cerr << "note: suggested queue is " << r.at("suggested_queue").get<std::string>() << "\n";
      }
      if (r.contains("rows")) {
        std::string sep;
        for (const auto& c : r["columns"]) std::cout << std::exchange(sep, ",") << c["name"].get<std::string>();
        std::cout << "\n";
        for (const auto& row : r["rows"]) {
          sep.clear();
          for (const auto& v : row) std::cout << std::exchange(sep, ",") << cell(v);
          std::cout << "\n";
        }
        if (r.value("truncated", false)) {
          std::cerr << "(truncated; full result at " << r["job"]["output_url"].get<std::string>() << ")\n";
        }
      } else if (wait) {
        print(wait_for_job(api, r.at("job_id")));
      } else {
        print(r);
      }
      if (r.contains("job") && r["job"]["state"] != "SUCCEEDED") {
        std::cerr << r["job"]["state"].get<std::string>() << ": " << cell(r["job"]["error"]) << "\n";
        return 1;
      }
    } else if (*status_cmd) {
      print(api.get("/v1/jobs/" + std::to_string(job_id)));
    } else if (*cancel_cmd) {
      print(api.post("/v1/jobs/" + std::to_string(job_id) + "/cancel"));
    } else if (*resubmit_cmd) {
      print(api.post("/v1/jobs/" + std::to_string(job_id) + "/resubmit"));
    } else if (*jobs_cmd) {
      std::string path = "/v1/jobs";
      std::string sep = "?";
      if (!state.empty()) path += std::exchange(sep, "&") + "state=" + state;
      if (!queue.empty()) path += sep + "queue=" + queue;
      const json listing = api.get(path);
      for (const auto& j : listing["jobs"]) {
        std::cout << j["job_id"] << "\t" << j["queue"].get<std::string>() << "\t" << j["state"].get<std::string>()
                  << "\t" << j["query"].get<std::string>() << "\n";
      }
    } else if (app.got_subcommand("tables")) {
      const json t = api.get("/v1/mydb/tables");
      std::cout << "used " << t["used_bytes"] << " of " << t["quota_bytes"] << " bytes\n";
      for (const auto& e : t["tables"]) {
        std::cout << e["name"].get<std::string>() << "\t" << e["rows"] << " rows\t" << e["bytes"] << " bytes\n";
      }
    } else if (*drop_cmd) {
      print(api.del("/v1/mydb/tables/" + table));
    } else if (*upload_cmd) {
      if (!create_spec.empty()) {
        json cols = json::array();
        std::stringstream ss(create_spec);
        for (std::string part; std::getline(ss, part, ',');) {
          const auto colon = part.find(':');
          if (colon == std::string::npos) casq::fail(casq::ErrorCode::BadRequest, "column spec needs name:type");
          cols.push_back({{"name", part.substr(0, colon)}, {"type", part.substr(colon + 1)}});
        }
        api.post("/v1/mydb/tables", {{"name", table}, {"columns", cols}});
      }
      print(api.post_csv("/v1/mydb/tables/" + table + "/rows", read_file(file)));
    } else if (*export_cmd) {
      const json r = api.post("/v1/export", {{"table", table}, {"format", format}});
      if (out.empty()) {
        print(r);
      } else {
        const json done = wait_for_job(api, r.at("job_id"));
        if (done["state"] != "SUCCEEDED") {
          print(done);
          return 1;
        }
        const auto resp = api.raw("GET", done["output_url"].get<std::string>());
        if (resp.status != 200) casq::federation::unwrap(resp);
        std::ofstream(out, std::ios::binary) << resp.body;
        std::cout << "wrote " << resp.body.size() << " bytes to " << out << "\n";
      }
    } else if (*groups_cmd) {
      const std::string base = "/v1/groups/" + std::to_string(group_id);
      if (*g_create) {
        print(api.post("/v1/groups", {{"name", group_name}}));
      } else if (*g_invite) {
        print(api.post(base + "/invite", {{"user", member}}));
      } else if (*g_accept) {
        print(api.post(base + "/accept"));
      } else if (*g_publish) {
        print(api.post(base + "/publish", {{"table", table}}));
      } else {
        print(api.get("/v1/groups"));
      }
    } else if (*load_cmd) {
      if (*l_run) {
        json files = json::object();
        for (const auto& p : inputs) files[fs::path(p).filename().string()] = read_file(p);
        const json r = api.post("/v1/loader/runs", {{"workflow", read_file(workflow)}, {"inputs", files}});
        if (!wait) {
          print(r);
          return 0;
        }
        const std::string path = "/v1/loader/runs/" + std::to_string(r.at("run_id").get<std::int64_t>());
        json rep;
        do {
          std::this_thread::sleep_for(std::chrono::milliseconds(200));
          rep = api.get(path);
        } while (rep["state"] == "QUEUED" || rep["state"] == "RUNNING");
        print(rep);
        return rep["state"] == "SUCCEEDED" ? 0 : 1;
      }
      if (*l_status) print(api.get("/v1/loader/runs/" + std::to_string(run_id)));
      if (*l_cancel) print(api.post("/v1/loader/runs/" + std::to_string(run_id) + "/cancel"));
      if (load_cmd->got_subcommand("list")) print(api.get("/v1/loader/runs"));
    } else if (*sim_cmd) {
      print(api.post("/v1/workload/simulate", {{"n", n}, {"alpha", alpha}, {"seed", seed}}));
    } else if (*fed_cmd) {
      if (*f_fetch) {
        json body = {{"node", node}, {"table", table}};
        if (!owner.empty()) body["owner"] = owner;
        if (!local_name.empty()) body["as"] = local_name;
        print(api.post("/v1/federation/fetch", body));
      } else {
        print(api.get(all_nodes ? "/v1/federation/spaces" : "/v1/federation/space"));
      }
    }
  } catch (const casq::Error& e) {
    std::cerr << "error " << casq::code_name(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

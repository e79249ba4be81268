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

#include "casq/service/server.hpp"

#include <fstream>

#include <httplib.h>

#include "casq/service/error_map.hpp"

namespace casq::service {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Request = httplib::Request;
using Response = httplib::Response;

void send_json(Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status(code), error_envelope(code, message));
}

json parse_body(const Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    fail(ErrorCode::BadRequest, std::string("malformed JSON body: ") + e.what());
  }
}

std::int64_t parse_id(const std::string& s) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::BadRequest, "bad id '" + s + "'");
}

std::optional<std::string> param(const Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

// Runs fn and converts any failure into an error envelope.
template <typename Fn>
void guarded(Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, e.code(), e.what());
  } catch (const json::exception& e) {
    send_error(res, ErrorCode::BadRequest, e.what());
  } catch (const std::exception& e) {
    send_error(res, ErrorCode::StorageFailure, e.what());
  }
}

}  // namespace

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::routes() {
  auto& srv = *server_;
  Service& s = service_;

  using Api = std::function<ApiResult(const Request&)>;
  using Authed = std::function<ApiResult(const std::string& user, const Request&)>;
  auto reg = [&srv](const std::string& method, const std::string& pattern, httplib::Server::Handler h) {
    for (const std::string prefix : {"", "/v1"}) {
      const std::string p = prefix + pattern;
      if (method == "GET") srv.Get(p, h);
      if (method == "POST") srv.Post(p, h);
      if (method == "DELETE") srv.Delete(p, h);
    }
  };
  auto open = [&](const std::string& method, const std::string& pattern, Api fn) {
    reg(method, pattern, [fn](const Request& req, Response& res) {
      guarded(res, [&] {
        const ApiResult r = fn(req);
        send_json(res, r.status, ok_envelope(r.result));
      });
    });
  };
  auto authed = [&](const std::string& method, const std::string& pattern, Authed fn) {
    reg(method, pattern, [fn, &s](const Request& req, Response& res) {
      guarded(res, [&] {
        const std::string user = s.authenticate(req.get_header_value("Authorization"));
        const ApiResult r = fn(user, req);
        send_json(res, r.status, ok_envelope(r.result));
      });
    });
  };

  open("POST", "/auth/login", [&s](const Request& req) { return s.login(parse_body(req)); });
  open("GET", "/federation/identity", [&s](const Request&) { return s.identity_info(); });
  open("GET", "/queues", [&s](const Request&) { return s.queues(); });
  open("GET", "/wheel/stats", [&s](const Request&) { return s.wheel_stats(); });
  open("GET", "/ui/config", [&s](const Request&) { return s.ui_config(); });

  authed("POST", "/jobs", [&s](const std::string& u, const Request& req) { return s.submit_job(u, parse_body(req)); });
  authed("GET", "/jobs", [&s](const std::string& u, const Request& req) {
    JobQuery q;
    q.state = param(req, "state");
    q.queue = param(req, "queue");
    if (auto f = param(req, "from")) q.from = parse_id(*f);
    if (auto t = param(req, "to")) q.to = parse_id(*t);
    return s.list_jobs(u, q);
  });
  authed("GET", R"(/jobs/([^/]+))",
         [&s](const std::string& u, const Request& req) { return s.job_status(u, parse_id(req.matches[1])); });
  authed("POST", R"(/jobs/([^/]+)/resubmit)",
         [&s](const std::string& u, const Request& req) { return s.resubmit_job(u, parse_id(req.matches[1])); });
  authed("POST", R"(/jobs/([^/]+)/cancel)",
         [&s](const std::string& u, const Request& req) { return s.cancel_job(u, parse_id(req.matches[1])); });

  authed("GET", "/mydb/tables", [&s](const std::string& u, const Request&) { return s.list_tables(u); });
  authed("POST", "/mydb/tables",
         [&s](const std::string& u, const Request& req) { return s.create_table(u, parse_body(req)); });
  authed("DELETE", R"(/mydb/tables/([^/]+))",
         [&s](const std::string& u, const Request& req) { return s.drop_table(u, req.matches[1]); });
  authed("POST", R"(/mydb/tables/([^/]+)/rows)",
         [&s](const std::string& u, const Request& req) { return s.upload_rows(u, req.matches[1], req.body); });
  authed("POST", "/export", [&s](const std::string& u, const Request& req) { return s.export_table(u, parse_body(req)); });

  authed("POST", "/groups", [&s](const std::string& u, const Request& req) { return s.create_group(u, parse_body(req)); });
  authed("GET", "/groups", [&s](const std::string& u, const Request&) { return s.list_groups(u); });
  authed("POST", R"(/groups/([^/]+)/invite)", [&s](const std::string& u, const Request& req) {
    return s.invite(u, parse_id(req.matches[1]), parse_body(req));
  });
  authed("POST", R"(/groups/([^/]+)/accept)",
         [&s](const std::string& u, const Request& req) { return s.accept(u, parse_id(req.matches[1])); });
  authed("POST", R"(/groups/([^/]+)/publish)", [&s](const std::string& u, const Request& req) {
    return s.publish(u, parse_id(req.matches[1]), parse_body(req));
  });

  authed("GET", "/federation/space", [&s](const std::string& u, const Request&) { return s.federation_space(u); });
  authed("POST", "/federation/fetch", [&s](const std::string& u, const Request& req) {
    return s.federation_fetch(u, req.get_header_value("Authorization").substr(7), parse_body(req));
  });
  authed("GET", "/federation/spaces", [&s](const std::string& u, const Request& req) {
    return s.federation_spaces(u, req.get_header_value("Authorization").substr(7));
  });

  authed("POST", "/workload/simulate",
         [&s](const std::string&, const Request& req) { return s.simulate(parse_body(req)); });

  authed("POST", "/loader/runs",
         [&s](const std::string& u, const Request& req) { return s.start_load(u, parse_body(req)); });
  authed("GET", "/loader/runs", [&s](const std::string& u, const Request&) { return s.load_runs(u); });
  authed("GET", R"(/loader/runs/([^/]+))",
         [&s](const std::string& u, const Request& req) { return s.load_run(u, parse_id(req.matches[1])); });
  authed("POST", R"(/loader/runs/([^/]+)/cancel)",
         [&s](const std::string& u, const Request& req) { return s.cancel_load(u, parse_id(req.matches[1])); });

  // Raw payloads.
  reg("GET", R"(/federation/table/([^/]+)/([^/]+))", [&s](const Request& req, Response& res) {
    guarded(res, [&] {
      const std::string user = s.authenticate(req.get_header_value("Authorization"));
      const auto dump = s.federation_table(user, req.matches[1], req.matches[2]);
      res.set_header(federation::kSchemaHeader, federation::schema_to_json(dump.schema).dump());
      res.set_header("X-Casq-Rows", std::to_string(dump.rows));
      res.status = 200;
      res.set_content(dump.csv, "text/csv");
    });
  });
  reg("GET", R"(/files/([^/]+))", [&s](const Request& req, Response& res) {
    guarded(res, [&] {
      const std::string user = s.authenticate(req.get_header_value("Authorization"));
      const auto artifact = s.file_for(user, req.matches[1]);
      auto in = std::make_shared<std::ifstream>(artifact.path, std::ios::binary);
      if (!*in) fail(ErrorCode::NotFound, "file is gone");
      res.status = 200;
      res.set_header("Content-Disposition", "attachment; filename=\"" + artifact.path.filename().string() + "\"");
      res.set_content_provider(static_cast<std::size_t>(artifact.bytes), artifact.content_type,
                               [in](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                                 std::vector<char> buf(std::min<std::size_t>(length, 64 * 1024));
                                 in->seekg(static_cast<std::streamoff>(offset));
                                 in->read(buf.data(), static_cast<std::streamsize>(buf.size()));
                                 const auto n = in->gcount();
                                 if (n <= 0) return false;
                                 sink.write(buf.data(), static_cast<std::size_t>(n));
                                 return true;
                               });
    });
  });

  const fs::path ui = s.config().ui_dir.empty() ? fs::path() : s.config().resolve(s.config().ui_dir);
  if (!ui.empty() && fs::is_directory(ui)) {
    srv.set_mount_point("/ui", ui.string());
  }

  srv.set_error_handler([](const Request& req, Response& res) {
    if (res.body.empty()) {
      const ErrorCode code = res.status == 404 ? ErrorCode::NotFound : ErrorCode::BadRequest;
      const int status = res.status;
      send_error(res, code, "no route for " + req.method + " " + req.path);
      res.status = status;
    }
  });
  srv.set_exception_handler([](const Request&, Response& res, std::exception_ptr) {
    send_error(res, ErrorCode::StorageFailure, "internal error");
  });
}

int HttpServer::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) fail(ErrorCode::StorageFailure, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void HttpServer::run(const std::string& host, int port) {
  port_ = port;
  if (!server_->bind_to_port(host, port)) fail(ErrorCode::StorageFailure, "cannot bind " + host + ":" + std::to_string(port));
  server_->listen_after_bind();
}

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace casq::service

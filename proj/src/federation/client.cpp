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

#include "casq/federation/client.hpp"

#include <future>

#include <httplib.h>

#include "casq/core/error.hpp"

namespace casq::federation {

using nlohmann::json;

namespace {

httplib::Client make_client(const std::string& url, std::chrono::milliseconds timeout) {
  httplib::Client c(url);
  const auto secs = static_cast<time_t>(timeout.count() / 1000);
  const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
  c.set_connection_timeout(secs, usecs);
  c.set_read_timeout(secs, usecs);
  c.set_write_timeout(secs, usecs);
  return c;
}

HttpResponse convert(const httplib::Result& res, const std::string& url, const std::string& path) {
  if (!res) {
    fail(ErrorCode::TransferFailed, "request to " + url + path + " failed: " + httplib::to_string(res.error()));
  }
  HttpResponse out;
  out.status = res->status;
  out.body = res->body;
  for (const auto& [k, v] : res->headers) out.headers[k] = v;
  return out;
}

httplib::Headers auth(const std::string& bearer) {
  httplib::Headers h;
  if (!bearer.empty()) h.emplace("Authorization", "Bearer " + bearer);
  return h;
}

}  // namespace

NodeClient::NodeClient(std::string url, std::chrono::milliseconds timeout) : url_(std::move(url)), timeout_(timeout) {
  while (!url_.empty() && url_.back() == '/') url_.pop_back();
}

HttpResponse NodeClient::get(const std::string& path, const std::string& bearer) const {
  auto c = make_client(url_, timeout_);
  return convert(c.Get(path, auth(bearer)), url_, path);
}

HttpResponse NodeClient::send(const std::string& method, const std::string& path, const std::string& body,
                              const std::string& content_type, const std::string& bearer) const {
  auto c = make_client(url_, timeout_);
  const auto h = auth(bearer);
  if (method == "POST") return convert(c.Post(path, h, body, content_type), url_, path);
  if (method == "PUT") return convert(c.Put(path, h, body, content_type), url_, path);
  if (method == "DELETE") return convert(c.Delete(path, h, body, content_type), url_, path);
  if (method == "GET") return convert(c.Get(path, h), url_, path);
  fail(ErrorCode::BadRequest, "unsupported method " + method);
}

json unwrap(const HttpResponse& r) {
  json doc;
  try {
    doc = json::parse(r.body);
  } catch (const json::exception&) {
    fail(ErrorCode::TransferFailed, "HTTP " + std::to_string(r.status) + " with a non-JSON body");
  }
  if (doc.value("ok", false)) return doc.contains("result") ? doc.at("result") : json();
  if (!doc.contains("error")) fail(ErrorCode::TransferFailed, "HTTP " + std::to_string(r.status) + " without envelope");
  const json& e = doc.at("error");
  const std::string code = e.value("code", "");
  const std::string message = e.value("message", "");
  if (auto c = parse_code_name(code)) throw Error(*c, message);
  fail(ErrorCode::TransferFailed, "remote error " + code + ": " + message);
}

std::vector<SpaceResult> list_spaces(const std::string& token, const std::vector<Endpoint>& nodes,
                                     std::chrono::milliseconds timeout) {
  std::vector<std::future<SpaceResult>> pending;
  for (const auto& n : nodes) {
    pending.push_back(std::async(std::launch::async, [n, token, timeout] {
      SpaceResult r;
      r.node = n;
      try {
        const auto resp = NodeClient(n.url, timeout).get("/federation/space", token);
        r.summary = space_from_json(unwrap(resp));
      } catch (const Error& e) {
        r.error_code = std::string(code_name(e.code()));
        r.error_message = e.what();
      } catch (const std::exception& e) {
        r.error_code = "TransferFailed";
        r.error_message = e.what();
      }
      return r;
    }));
  }
  std::vector<SpaceResult> out;
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

mydb::TableInfo fetch_remote_table(const std::string& token, const Endpoint& source, const std::string& owner,
                                   const std::string& table, mydb::MyDbManager& mydb, const std::string& local_user,
                                   const std::string& local_table, std::chrono::milliseconds timeout) {
  const std::string path = "/federation/table/" + owner + "/" + table;
  const auto resp = NodeClient(source.url, timeout).get(path, token);
  if (resp.status != 200) unwrap(resp);
  auto it = resp.headers.find(kSchemaHeader);
  if (it == resp.headers.end()) fail(ErrorCode::TransferFailed, "response carries no table schema");
  Schema schema;
  try {
    schema = schema_from_json(json::parse(it->second));
  } catch (const json::exception& e) {
    fail(ErrorCode::TransferFailed, std::string("bad schema header: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::TransferFailed, e.what());
  }
  return materialize(mydb, local_user, local_table, schema, resp.body);
}

}  // namespace casq::federation

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

#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "casq/federation/node.hpp"
#include "casq/mydb/mydb.hpp"

namespace casq::federation {

struct Endpoint {
  std::string name;  // label used in results
  std::string url;   // http://host:port
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
};

// Minimal HTTP access to a casq node. Transport failures throw
// TransferFailed.
class NodeClient {
 public:
  explicit NodeClient(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(5));

  HttpResponse get(const std::string& path, const std::string& bearer = {}) const;
  HttpResponse send(const std::string& method, const std::string& path, const std::string& body,
                    const std::string& content_type, const std::string& bearer = {}) const;

  const std::string& url() const { return url_; }

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

// Unwraps {ok, result | error{code, message}}. Error envelopes are
// rethrown as casq::Error with the remote code.
nlohmann::json unwrap(const HttpResponse& r);

struct SpaceResult {
  Endpoint node;
  std::optional<SpaceSummary> summary;
  std::optional<std::string> error_code;  // e.g. "UntrustedIssuer", "TransferFailed"
  std::optional<std::string> error_message;
};

// Queries every node concurrently. Unreachable or rejecting nodes appear
// as error entries; the call itself does not fail.
std::vector<SpaceResult> list_spaces(const std::string& token, const std::vector<Endpoint>& nodes,
                                     std::chrono::milliseconds timeout = std::chrono::seconds(5));

// Streams owner's table from the source node and stores it as a new
// table in the local user's MyDB. AccessDenied (source), QuotaExceeded
// (local), TransferFailed (nothing is left behind locally).
mydb::TableInfo fetch_remote_table(const std::string& token, const Endpoint& source, const std::string& owner,
                                   const std::string& table, mydb::MyDbManager& mydb, const std::string& local_user,
                                   const std::string& local_table,
                                   std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace casq::federation

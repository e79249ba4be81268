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
#include <string>

#include <json.hpp>

#include "casq/federation/client.hpp"

namespace casq::service {

// Client of the HTTP API used by the CLI and the tests. Error envelopes
// are rethrown as casq::Error with the server's code.
class ApiClient {
 public:
  explicit ApiClient(std::string url, std::string token = {},
                     std::chrono::milliseconds timeout = std::chrono::seconds(60));

  void set_token(std::string token) { token_ = std::move(token); }
  const std::string& token() const { return token_; }

  // Logs in and keeps the token. Returns the login result.
  nlohmann::json login(const std::string& user, const std::string& password);

  nlohmann::json get(const std::string& path) const;
  nlohmann::json post(const std::string& path, const nlohmann::json& body = nlohmann::json::object()) const;
  nlohmann::json del(const std::string& path) const;
  // POST with a text/csv body.
  nlohmann::json post_csv(const std::string& path, const std::string& csv) const;

  // Status, headers and body without unwrapping.
  federation::HttpResponse raw(const std::string& method, const std::string& path, const std::string& body = {},
                               const std::string& content_type = "application/json") const;

 private:
  federation::NodeClient client_;
  std::string token_;
};

}  // namespace casq::service

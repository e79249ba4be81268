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

#include "casq/service/api_client.hpp"

namespace casq::service {

using nlohmann::json;

ApiClient::ApiClient(std::string url, std::string token, std::chrono::milliseconds timeout)
    : client_(std::move(url), timeout), token_(std::move(token)) {}

json ApiClient::login(const std::string& user, const std::string& password) {
  json r = federation::unwrap(raw("POST", "/v1/auth/login", json{{"user", user}, {"password", password}}.dump()));
  token_ = r.at("token").get<std::string>();
  return r;
}

federation::HttpResponse ApiClient::raw(const std::string& method, const std::string& path, const std::string& body,
                                        const std::string& content_type) const {
  if (method == "GET") return client_.get(path, token_);
  return client_.send(method, path, body, content_type, token_);
}

json ApiClient::get(const std::string& path) const { return federation::unwrap(raw("GET", path)); }

json ApiClient::post(const std::string& path, const json& body) const {
  return federation::unwrap(raw("POST", path, body.dump()));
}

json ApiClient::del(const std::string& path) const { return federation::unwrap(raw("DELETE", path)); }

json ApiClient::post_csv(const std::string& path, const std::string& csv) const {
  return federation::unwrap(raw("POST", path, csv, "text/csv"));
}

}  // namespace casq::service

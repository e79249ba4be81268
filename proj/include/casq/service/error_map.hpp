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

#include <string>

#include <json.hpp>

#include "casq/core/error.hpp"

namespace casq::service {

// The HTTP status each error code is reported with.
int http_status(ErrorCode code);

// {"ok": true, "result": ...}
nlohmann::json ok_envelope(nlohmann::json result);
// {"ok": false, "error": {"code": ..., "message": ...}}
nlohmann::json error_envelope(ErrorCode code, const std::string& message);

}  // namespace casq::service

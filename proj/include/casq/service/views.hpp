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

#include <json.hpp>

#include "casq/core/job.hpp"
#include "casq/core/value.hpp"
#include "casq/loader/engine.hpp"
#include "casq/mydb/groups.hpp"
#include "casq/mydb/mydb.hpp"
#include "casq/wheel/wheel.hpp"

// JSON projections returned by the API.
namespace casq::service {

nlohmann::json to_json(const JobRecord& job);
nlohmann::json to_json(const Value& v);
nlohmann::json to_json(const Schema& schema);
nlohmann::json to_json(const mydb::TableInfo& t);
nlohmann::json to_json(const mydb::Group& g);
nlohmann::json to_json(const wheel::WheelStats& s);
nlohmann::json to_json(const QueueSpec& q);
nlohmann::json to_json(const loader::RunReport& r);
nlohmann::json to_json(const loader::UndoReport& r);
nlohmann::json to_json(const loader::StateDigest& d);

}  // namespace casq::service

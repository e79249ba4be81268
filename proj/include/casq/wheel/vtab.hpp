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

#include <functional>
#include <string>
#include <string_view>

#include "casq/core/sqlite.hpp"
#include "casq/wheel/shared_scan.hpp"

namespace casq::wheel {

// Registers the "casq_wheel" virtual table module on a connection. A
// virtual table created with `USING casq_wheel(<catalog table>)` attaches
// one rider to that table's wheel per scan and yields its revolution.
// `cancelled` is polled while a scan waits for blocks.
void register_wheel_module(sqlite::Database& db, WheelRegistry& registry,
                           std::function<bool()> cancelled = {});

// Creates temp.casq_wheel_<table> on a connection where the module is
// registered and returns that qualified name.
std::string create_wheel_vtab(sqlite::Database& db, std::string_view table);

}  // namespace casq::wheel

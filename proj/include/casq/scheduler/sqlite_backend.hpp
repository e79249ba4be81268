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

#include <filesystem>
#include <functional>

#include "casq/scheduler/scheduler.hpp"

namespace casq::wheel {
class WheelRegistry;
}

namespace casq::scheduler {

struct SqliteBackendOptions {
  std::filesystem::path catalog;    // public tables, opened read-only
  std::filesystem::path mydb_root;  // holds mydb_<user>.db files
  wheel::WheelRegistry* wheels = nullptr;
  std::size_t batch_rows = 256;
};

// Reference backend on an embedded SQLite engine. Each execution opens
// its own connection on the catalog and attaches the referenced MyDB
// files under their physical names. Registers sleep(seconds), which
// honours cancellation in 10 ms steps, and interrupts long statements
// from a progress handler.
class SqliteBackend : public ExecutionBackend {
 public:
  explicit SqliteBackend(SqliteBackendOptions options);

  std::int64_t execute(const ExecutionRequest& request, ResultSink& sink, const CancelToken& token) override;

 private:
  SqliteBackendOptions options_;
};

}  // namespace casq::scheduler

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

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "casq/core/sqlite.hpp"
#include "casq/loader/target.hpp"
#include "casq/loader/validate.hpp"
#include "casq/loader/workflow.hpp"

namespace casq::loader {

using RunId = std::int64_t;

enum class NodeState { Pending, Running, Done, Failed, Undone };
enum class RunState { Queued, Running, Succeeded, Failed, Cancelled };

std::string_view node_state_name(NodeState s);
std::string_view run_state_name(RunState s);

struct NodeReport {
  std::string id;
  StageKind kind = StageKind::Custom;
  NodeState state = NodeState::Pending;
  std::optional<std::int64_t> started_at;  // ms since epoch
  std::optional<std::int64_t> finished_at;
  std::int64_t rows = 0;
  std::vector<std::string> findings;
  std::optional<std::string> error;
};

enum class EventType { Started, Done, Failed, Aborted, Undone };

std::string_view event_name(EventType e);

struct Event {
  std::int64_t seq = 0;
  std::int64_t at = 0;  // ms since epoch
  std::string node;
  EventType type = EventType::Started;
};

struct RunReport {
  RunId run_id = 0;
  std::string workflow;
  std::string owner;
  std::string target;
  RunState state = RunState::Queued;
  std::vector<NodeReport> nodes;  // declaration order
  std::vector<std::string> completion_order;
  std::vector<std::string> undo_order;
  std::vector<Event> events;
  std::vector<Violation> violations;
  StateDigest digest_before;
  std::optional<StateDigest> digest_after;
  bool unwound = false;
  std::optional<std::string> error;

  const NodeReport& node(const std::string& id) const;
};

struct UndoReport {
  RunId run_id = 0;
  std::vector<std::string> undone;  // in undo order
  StateDigest digest_before;
  StateDigest digest_after;
  bool digest_matches = false;
};

struct RunOptions {
  std::string owner;
  // Called on the engine's thread after each node finishes successfully,
  // with the number of nodes done so far.
  std::function<void(const std::string& node, std::size_t done)> on_node_done;
};

// Runs workflows. Runs execute one at a time; within a run, up to
// `width` eligible nodes execute concurrently. A failed node stops new
// nodes from starting and the run unwinds: undo actions of DONE nodes run
// one by one in reverse completion order. Loaded rows are tracked per run
// (staging tables are named by run, published rows by rowid) so undo is
// exact.
class LoaderEngine {
 public:
  LoaderEngine(std::filesystem::path staging_db, std::size_t width = 2);
  ~LoaderEngine();
  LoaderEngine(const LoaderEngine&) = delete;
  LoaderEngine& operator=(const LoaderEngine&) = delete;

  RunId start(Workflow wf, std::vector<std::filesystem::path> inputs, std::shared_ptr<LoadTarget> target,
              RunOptions opts = {});
  // start + wait.
  RunReport run(Workflow wf, std::vector<std::filesystem::path> inputs, std::shared_ptr<LoadTarget> target,
                RunOptions opts = {});

  RunReport wait(RunId id);
  RunReport report(RunId id);  // UnknownRun
  std::vector<RunReport> runs();

  // Asks a run to stop; running nodes finish or abort at their next
  // checkpoint. Does not wait.
  void request_cancel(RunId id);
  // Stops the run if needed and unwinds it (a finished run is rolled
  // back as well). AlreadyUnwound on a second cancel or when the run
  // already unwound after a failure.
  UndoReport cancel(RunId id);

  // Digest of a target together with the staging area.
  StateDigest digest(LoadTarget& target);

  std::size_t width() const { return width_; }
  const std::filesystem::path& staging_path() const { return staging_path_; }

 private:
  struct Run;
  struct Staging;
  void execute(const std::shared_ptr<Run>& run);
  void unwind(Run& run, std::unique_lock<std::mutex>& lock);
  std::shared_ptr<Run> find(RunId id);
  RunReport snapshot(const Run& run) const;

  std::filesystem::path staging_path_;
  std::size_t width_;
  std::unique_ptr<Staging> staging_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<RunId, std::shared_ptr<Run>> runs_;
  RunId next_id_ = 1;
  std::mutex exec_mu_;  // one run at a time
  std::vector<std::thread> threads_;
};

}  // namespace casq::loader

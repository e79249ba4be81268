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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace casq {

using JobId = std::int64_t;

enum class JobState { Submitted, Started, Succeeded, Failed, Killed, Cancelled, Promoted };

std::string_view state_name(JobState s);
std::optional<JobState> parse_state(std::string_view name);

// SUBMITTED -> STARTED -> {SUCCEEDED, FAILED, KILLED, CANCELLED, PROMOTED},
// plus SUBMITTED -> CANCELLED for jobs withdrawn while still queued.
bool is_legal_transition(JobState from, JobState to);
bool is_terminal(JobState s);

enum class TargetKind { ReturnRows, IntoMyDb, ExtractFile };

std::string_view target_kind_name(TargetKind k);
std::optional<TargetKind> parse_target_kind(std::string_view name);

// Where a job's rows go. `table` names the MyDB table for IntoMyDb and the
// logical source table (e.g. "MyDB.rgal", "GROUP.cosmology.rgal") for
// ExtractFile; `format` is "csv" or "votable" for ExtractFile.
struct JobTarget {
  TargetKind kind = TargetKind::ReturnRows;
  std::string table;
  std::string format;

  static JobTarget return_rows() { return {}; }
  static JobTarget into_mydb(std::string table) {
    return {TargetKind::IntoMyDb, std::move(table), {}};
  }
  static JobTarget extract_file(std::string table, std::string format) {
    return {TargetKind::ExtractFile, std::move(table), std::move(format)};
  }

  bool operator==(const JobTarget&) const = default;
};

struct JobRecord {
  JobId job_id = 0;
  std::string user_id;
  std::string queue;
  std::string query_text;
  JobState state = JobState::Submitted;
  JobTarget target;
  std::int64_t submitted_at = 0;
  std::optional<std::int64_t> started_at;
  std::optional<std::int64_t> finished_at;
  std::int64_t rows_produced = 0;
  std::optional<std::string> output_url;
  std::optional<std::string> error;
  std::optional<JobId> parent_job;
  int promotion_count = 0;
  bool autocomplete = false;
  std::string fingerprint;
  // Name of the worker that executed the job ("short#0", "extract#1", ...).
  std::string worker;
};

// Checks the record-level invariants (timestamp order, output_url rules).
// Returns a description of the first violation, or nullopt.
std::optional<std::string> check_record(const JobRecord& r);

}  // namespace casq

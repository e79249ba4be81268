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

#include "casq/core/job.hpp"

#include <array>
#include <utility>

namespace casq {

namespace {

constexpr std::array<std::pair<JobState, std::string_view>, 7> kStates = {{
    {JobState::Submitted, "SUBMITTED"},
    {JobState::Started, "STARTED"},
    {JobState::Succeeded, "SUCCEEDED"},
    {JobState::Failed, "FAILED"},
    {JobState::Killed, "KILLED"},
    {JobState::Cancelled, "CANCELLED"},
    {JobState::Promoted, "PROMOTED"},
}};

}  // namespace

std::string_view state_name(JobState s) {
  for (const auto& [st, name] : kStates) {
    if (st == s) return name;
  }
  return "UNKNOWN";
}

std::optional<JobState> parse_state(std::string_view name) {
  for (const auto& [st, n] : kStates) {
    if (n == name) return st;
  }
  return std::nullopt;
}

bool is_terminal(JobState s) {
  return s != JobState::Submitted && s != JobState::Started;
}

bool is_legal_transition(JobState from, JobState to) {
  switch (from) {
    case JobState::Submitted:
      return to == JobState::Started || to == JobState::Cancelled;
    case JobState::Started:
      return is_terminal(to);
    default:
      return false;
  }
}

std::string_view target_kind_name(TargetKind k) {
  switch (k) {
    case TargetKind::ReturnRows: return "RETURN_ROWS";
    case TargetKind::IntoMyDb: return "INTO_MYDB";
    case TargetKind::ExtractFile: return "EXTRACT_FILE";
  }
  return "RETURN_ROWS";
}

std::optional<TargetKind> parse_target_kind(std::string_view name) {
  if (name == "RETURN_ROWS") return TargetKind::ReturnRows;
  if (name == "INTO_MYDB") return TargetKind::IntoMyDb;
  if (name == "EXTRACT_FILE") return TargetKind::ExtractFile;
  return std::nullopt;
}

std::optional<std::string> check_record(const JobRecord& r) {
  if (r.started_at && *r.started_at < r.submitted_at) return "started_at precedes submitted_at";
  if (r.finished_at) {
    const std::int64_t lower = r.started_at ? *r.started_at : r.submitted_at;
    if (*r.finished_at < lower) return "finished_at precedes an earlier timestamp";
  }
  if (r.output_url) {
    if (r.state != JobState::Succeeded) return "output_url set outside SUCCEEDED";
    if (r.target.kind == TargetKind::IntoMyDb) return "output_url set for a MyDB target";
  }
  if (r.promotion_count < 0) return "negative promotion_count";
  return std::nullopt;
}

}  // namespace casq

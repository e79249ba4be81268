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

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace casq {

// Every failure the system can report. The string form returned by
// code_name() is the stable wire identifier used by the HTTP API and CLI.
enum class ErrorCode {
  // core
  UnknownUser,
  UnknownQueue,
  TargetRequired,
  IllegalTransition,
  UnknownJob,
  NotTerminal,
  // sqlrewrite
  EmptyQuery,
  MalformedPseudoName,
  QueryRejected,
  AccessDenied,
  NoSuchTable,
  // scheduler
  QueueStopped,
  BadExponent,
  // mydb
  StorageFailure,
  TableExists,
  QuotaExceeded,
  DuplicateGroup,
  UnknownGroup,
  NotOwner,
  AlreadyMember,
  NotInvited,
  NotMember,
  // wheel
  BadK,
  WrongTable,
  SessionFailed,
  // exchange
  UnsupportedFormat,
  TypeMismatch,
  ArityMismatch,
  // loader
  CycleDetected,
  DanglingDependency,
  AlreadyUnwound,
  UnknownRun,
  // federation
  AuthFailed,
  UntrustedIssuer,
  BadSignature,
  Expired,
  TransferFailed,
  // service
  Unauthenticated,
  BadRequest,
  NotFound,
};

std::string_view code_name(ErrorCode code);
std::optional<ErrorCode> parse_code_name(std::string_view name);

// All codes in declaration order.
std::span<const ErrorCode> all_error_codes();

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace casq

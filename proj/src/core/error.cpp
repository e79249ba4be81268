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

#include "casq/core/error.hpp"

#include <array>

namespace casq {

namespace {

constexpr std::array kAllCodes = {
    ErrorCode::UnknownUser,       ErrorCode::UnknownQueue,
    ErrorCode::TargetRequired,    ErrorCode::IllegalTransition,
    ErrorCode::UnknownJob,        ErrorCode::NotTerminal,
    ErrorCode::EmptyQuery,        ErrorCode::MalformedPseudoName,
    ErrorCode::QueryRejected,     ErrorCode::AccessDenied,
    ErrorCode::NoSuchTable,       ErrorCode::QueueStopped,
    ErrorCode::BadExponent,       ErrorCode::StorageFailure,
    ErrorCode::TableExists,       ErrorCode::QuotaExceeded,
    ErrorCode::DuplicateGroup,    ErrorCode::UnknownGroup,
    ErrorCode::NotOwner,          ErrorCode::AlreadyMember,
    ErrorCode::NotInvited,        ErrorCode::NotMember,
    ErrorCode::BadK,              ErrorCode::WrongTable,
    ErrorCode::SessionFailed,     ErrorCode::UnsupportedFormat,
    ErrorCode::TypeMismatch,      ErrorCode::ArityMismatch,
    ErrorCode::CycleDetected,     ErrorCode::DanglingDependency,
    ErrorCode::AlreadyUnwound,    ErrorCode::UnknownRun,
    ErrorCode::AuthFailed,        ErrorCode::UntrustedIssuer,
    ErrorCode::BadSignature,      ErrorCode::Expired,
    ErrorCode::TransferFailed,    ErrorCode::Unauthenticated,
    ErrorCode::BadRequest,        ErrorCode::NotFound,
};

}  // namespace

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::UnknownQueue: return "UnknownQueue";
    case ErrorCode::TargetRequired: return "TargetRequired";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::NotTerminal: return "NotTerminal";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::MalformedPseudoName: return "MalformedPseudoName";
    case ErrorCode::QueryRejected: return "QueryRejected";
    case ErrorCode::AccessDenied: return "AccessDenied";
    case ErrorCode::NoSuchTable: return "NoSuchTable";
    case ErrorCode::QueueStopped: return "QueueStopped";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::TableExists: return "TableExists";
    case ErrorCode::QuotaExceeded: return "QuotaExceeded";
    case ErrorCode::DuplicateGroup: return "DuplicateGroup";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::NotOwner: return "NotOwner";
    case ErrorCode::AlreadyMember: return "AlreadyMember";
    case ErrorCode::NotInvited: return "NotInvited";
    case ErrorCode::NotMember: return "NotMember";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::WrongTable: return "WrongTable";
    case ErrorCode::SessionFailed: return "SessionFailed";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DanglingDependency: return "DanglingDependency";
    case ErrorCode::AlreadyUnwound: return "AlreadyUnwound";
    case ErrorCode::UnknownRun: return "UnknownRun";
    case ErrorCode::AuthFailed: return "AuthFailed";
    case ErrorCode::UntrustedIssuer: return "UntrustedIssuer";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::Expired: return "Expired";
    case ErrorCode::TransferFailed: return "TransferFailed";
    case ErrorCode::Unauthenticated: return "Unauthenticated";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

std::span<const ErrorCode> all_error_codes() { return kAllCodes; }

std::optional<ErrorCode> parse_code_name(std::string_view name) {
  for (ErrorCode c : all_error_codes()) {
    if (code_name(c) == name) return c;
  }
  return std::nullopt;
}

}  // namespace casq

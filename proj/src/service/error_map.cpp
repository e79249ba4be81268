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

#include "casq/service/error_map.hpp"

namespace casq::service {

int http_status(ErrorCode code) {
  using E = ErrorCode;
  switch (code) {
    case E::UnknownQueue:
    case E::TargetRequired:
    case E::EmptyQuery:
    case E::MalformedPseudoName:
    case E::QueryRejected:
    case E::BadExponent:
    case E::BadK:
    case E::WrongTable:
    case E::UnsupportedFormat:
    case E::BadRequest:
      return 400;
    case E::AuthFailed:
    case E::UntrustedIssuer:
    case E::BadSignature:
    case E::Expired:
    case E::Unauthenticated:
      return 401;
    case E::AccessDenied:
    case E::NotOwner:
    case E::NotInvited:
    case E::NotMember:
      return 403;
    case E::UnknownUser:
    case E::UnknownJob:
    case E::NoSuchTable:
    case E::UnknownGroup:
    case E::UnknownRun:
    case E::NotFound:
      return 404;
    case E::IllegalTransition:
    case E::NotTerminal:
    case E::TableExists:
    case E::DuplicateGroup:
    case E::AlreadyMember:
    case E::AlreadyUnwound:
      return 409;
    case E::QuotaExceeded:
      return 413;
    case E::TypeMismatch:
    case E::ArityMismatch:
    case E::CycleDetected:
    case E::DanglingDependency:
      return 422;
    case E::StorageFailure:
    case E::SessionFailed:
      return 500;
    case E::TransferFailed:
      return 502;
    case E::QueueStopped:
      return 503;
  }
  return 500;
}

nlohmann::json ok_envelope(nlohmann::json result) {
  return {{"ok", true}, {"result", std::move(result)}};
}

nlohmann::json error_envelope(ErrorCode code, const std::string& message) {
  return {{"ok", false}, {"error", {{"code", std::string(code_name(code))}, {"message", message}}}};
}

}  // namespace casq::service

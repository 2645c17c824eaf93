#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mservice {

enum class ErrorCode {
  // domain model
  MalformedMsisdn,
  NegativeAmount,
  AlreadyRegistered,
  NotSubscribed,
  UnknownCategory,
  UnknownUser,
  UnknownUserGroup,
  UnknownAd,
  UnknownContent,
  ValidationFailed,
  // session engine
  MalformedCode,
  WrongServiceCode,
  SessionAlreadyOpen,
  UnknownSession,
  InvalidInput,
  ServiceEmpty,
  // ad ledger
  NoActiveSponsor,
  ConsentRequired,
  NotALeaf,
  UnknownCode,
  ExpiredCode,
  WrongMsisdn,
  UnknownSponsor,
  NonPositiveAmount,
  // content catalog
  EmptyCategory,
  NotAuthorized,
  EmptyText,
  NotADoctor,
  UnknownQuestion,
  AlreadyAnswered,
  // gateway
  EmptyMessage,
  // admin api
  BadCredentials,
  Unauthorized,
  Forbidden,
  NotFound,
  MethodNotAllowed,
  BadRequest,
  // runner
  ConfigInvalid,
  PortInUse,
  FixtureInvalid,
  ExpectationFailed,
  StorageFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail = {});

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace mservice

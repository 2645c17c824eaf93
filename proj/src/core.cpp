#include <ctime>
#include <limits>

#include "mservice/domain.hpp"
#include "mservice/error.hpp"
#include "mservice/types.hpp"

namespace mservice {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedMsisdn: return "MalformedMsisdn";
    case ErrorCode::NegativeAmount: return "NegativeAmount";
    case ErrorCode::AlreadyRegistered: return "AlreadyRegistered";
    case ErrorCode::NotSubscribed: return "NotSubscribed";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::UnknownUserGroup: return "UnknownUserGroup";
    case ErrorCode::UnknownAd: return "UnknownAd";
    case ErrorCode::UnknownContent: return "UnknownContent";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::MalformedCode: return "MalformedCode";
    case ErrorCode::WrongServiceCode: return "WrongServiceCode";
    case ErrorCode::SessionAlreadyOpen: return "SessionAlreadyOpen";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ServiceEmpty: return "ServiceEmpty";
    case ErrorCode::NoActiveSponsor: return "NoActiveSponsor";
    case ErrorCode::ConsentRequired: return "ConsentRequired";
    case ErrorCode::NotALeaf: return "NotALeaf";
    case ErrorCode::UnknownCode: return "UnknownCode";
    case ErrorCode::ExpiredCode: return "ExpiredCode";
    case ErrorCode::WrongMsisdn: return "WrongMsisdn";
    case ErrorCode::UnknownSponsor: return "UnknownSponsor";
    case ErrorCode::NonPositiveAmount: return "NonPositiveAmount";
    case ErrorCode::EmptyCategory: return "EmptyCategory";
    case ErrorCode::NotAuthorized: return "NotAuthorized";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::NotADoctor: return "NotADoctor";
    case ErrorCode::UnknownQuestion: return "UnknownQuestion";
    case ErrorCode::AlreadyAnswered: return "AlreadyAnswered";
    case ErrorCode::EmptyMessage: return "EmptyMessage";
    case ErrorCode::BadCredentials: return "BadCredentials";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::Forbidden: return "Forbidden";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::MethodNotAllowed: return "MethodNotAllowed";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::FixtureInvalid: return "FixtureInvalid";
    case ErrorCode::ExpectationFailed: return "ExpectationFailed";
    case ErrorCode::StorageFailure: return "StorageFailure";
  }
  return "Unknown";
}

namespace {
std::string error_message(ErrorCode code, const std::string& detail) {
  std::string msg(to_string(code));
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}
}  // namespace

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(error_message(code, detail)), code_(code), detail_(std::move(detail)) {}

// ---------------------------------------------------------------- Money

Money::Money(std::int64_t tsh) : tsh_(tsh) {
  if (tsh < 0) throw Error(ErrorCode::NegativeAmount, std::to_string(tsh) + " Tsh");
}

Money Money::operator+(Money other) const { return Money(tsh_ + other.tsh_); }

Money Money::operator-(Money other) const {
  if (other.tsh_ > tsh_)
    throw Error(ErrorCode::NegativeAmount,
                std::to_string(tsh_) + " - " + std::to_string(other.tsh_) + " would go below zero");
  return Money(tsh_ - other.tsh_);
}

Money Money::operator*(std::int64_t factor) const { return Money(tsh_ * factor); }

// ---------------------------------------------------------------- Msisdn

Msisdn Msisdn::parse(std::string_view raw) {
  std::string_view digits = raw;
  if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
  if (digits.size() < 9 || digits.size() > 15)
    throw Error(ErrorCode::MalformedMsisdn, "'" + std::string(raw) + "' must have 9-15 digits");
  for (char c : digits)
    if (c < '0' || c > '9') throw Error(ErrorCode::MalformedMsisdn, "'" + std::string(raw) + "' has non-digits");
  return Msisdn(std::string(digits));
}

// ---------------------------------------------------------------- time

std::int64_t to_unix(Timestamp t) noexcept { return t.time_since_epoch().count(); }

Timestamp from_unix(std::int64_t seconds) noexcept { return Timestamp(std::chrono::seconds(seconds)); }

std::string to_iso8601(Timestamp t) {
  std::time_t tt = static_cast<std::time_t>(to_unix(t));
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool all_digits = true;
  for (std::size_t i = 0; i < text.size(); ++i)
    if (!(text[i] >= '0' && text[i] <= '9') && !(i == 0 && text[i] == '-')) all_digits = false;
  if (all_digits) {
    try {
      return from_unix(std::stoll(std::string(text)));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  std::tm tm{};
  std::string s(text);
  const char* end = strptime(s.c_str(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  if (!end || *end != '\0') return std::nullopt;
  return from_unix(static_cast<std::int64_t>(timegm(&tm)));
}

// ---------------------------------------------------------------- enums

std::string_view to_string(Permission p) noexcept {
  switch (p) {
    case Permission::Users: return "users";
    case Permission::UserGroups: return "user_groups";
    case Permission::Sponsors: return "sponsors";
    case Permission::Ads: return "ads";
    case Permission::Categories: return "categories";
    case Permission::Content: return "content";
    case Permission::QuestionsRead: return "questions.read";
    case Permission::AnswersCreate: return "answers.create";
    case Permission::Reports: return "reports";
    case Permission::Subscribers: return "subscribers";
    case Permission::Medical: return "medical";
  }
  return "?";
}

std::optional<Permission> permission_from_string(std::string_view s) noexcept {
  for (Permission p : {Permission::Users, Permission::UserGroups, Permission::Sponsors, Permission::Ads,
                       Permission::Categories, Permission::Content, Permission::QuestionsRead,
                       Permission::AnswersCreate, Permission::Reports, Permission::Subscribers,
                       Permission::Medical})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::string_view to_string(SubscriberStatus s) noexcept {
  return s == SubscriberStatus::Active ? "Active" : "Unsubscribed";
}

std::string_view to_string(QuestionStatus s) noexcept { return s == QuestionStatus::Open ? "Open" : "Answered"; }

std::string_view to_string(SmsRoute r) noexcept {
  switch (r) {
    case SmsRoute::Registration: return "Registration";
    case SmsRoute::Question: return "Question";
    case SmsRoute::ConfirmationCode: return "ConfirmationCode";
    case SmsRoute::Unrecognized: return "Unrecognized";
  }
  return "?";
}

std::string_view to_string(LedgerKind k) noexcept {
  switch (k) {
    case LedgerKind::ImpressionCharge: return "ImpressionCharge";
    case LedgerKind::Deposit: return "Deposit";
    case LedgerKind::RegistrationFee: return "RegistrationFee";
  }
  return "?";
}

std::string_view to_string(ConfirmationState s) noexcept {
  switch (s) {
    case ConfirmationState::Pending: return "Pending";
    case ConfirmationState::Redeemed: return "Redeemed";
    case ConfirmationState::Expired: return "Expired";
  }
  return "?";
}

std::string_view to_string(SmsKind k) noexcept {
  switch (k) {
    case SmsKind::Ad: return "Ad";
    case SmsKind::Content: return "Content";
    case SmsKind::Answer: return "Answer";
    case SmsKind::System: return "System";
  }
  return "?";
}

std::string_view to_string(Correlation::Kind k) noexcept {
  switch (k) {
    case Correlation::Kind::Confirmation: return "Confirmation";
    case Correlation::Kind::Question: return "Question";
    case Correlation::Kind::Payment: return "Payment";
  }
  return "?";
}

}  // namespace mservice

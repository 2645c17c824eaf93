#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "mservice/types.hpp"

namespace mservice {

/// Permission tags carried by a user group. Endpoint access is gated on
/// these; Medical marks a health professional allowed to author content
/// and answer questions.
enum class Permission {
  Users,
  UserGroups,
  Sponsors,
  Ads,
  Categories,
  Content,
  QuestionsRead,
  AnswersCreate,
  Reports,
  Subscribers,
  Medical,
};

std::string_view to_string(Permission p) noexcept;
std::optional<Permission> permission_from_string(std::string_view s) noexcept;

struct UserGroup {
  UserGroupId id;
  std::string name;
  std::set<Permission> permissions;

  [[nodiscard]] bool has(Permission p) const { return permissions.contains(p); }
};

struct User {
  UserId id;
  std::string username;
  std::string password_hash;
  UserGroupId group;
  std::string display_name;
};

enum class SubscriberStatus { Active, Unsubscribed };

struct Subscriber {
  SubscriberId id;
  Msisdn msisdn;
  Timestamp registered_at;
  SubscriberStatus status = SubscriberStatus::Active;
  bool consent_ads = false;
};

struct Category {
  CategoryId id;
  std::optional<CategoryId> parent;
  std::string name_sw;
  int position = 0;
  bool active = true;
};

struct ContentItem {
  ContentId id;
  CategoryId category;
  std::string body_sw;
  UserId author;
  Timestamp created_at;
  bool active = true;
};

enum class QuestionStatus { Open, Answered };

struct Question {
  QuestionId id;
  SubscriberId subscriber;
  std::string text;
  Timestamp received_at;
  QuestionStatus status = QuestionStatus::Open;
};

struct Answer {
  AnswerId id;
  QuestionId question;
  UserId doctor;
  std::string text;
  Timestamp answered_at;
};

enum class SmsRoute { Registration, Question, ConfirmationCode, Unrecognized };

/// Inbound SMS log row. The sender is kept raw because malformed numbers are
/// logged too.
struct ReceivedSms {
  ReceivedSmsId id;
  std::string msisdn;
  std::string shortcode;
  std::string text;
  Timestamp received_at;
  SmsRoute routed_as = SmsRoute::Unrecognized;
  std::string outcome;
};

struct Sponsor {
  SponsorId id;
  std::string name;
  std::string contact;
  Money balance;
  bool active = true;
};

struct Ad {
  AdId id;
  SponsorId sponsor;
  std::string body_sw;
  bool active = true;
  Timestamp created_at;
};

enum class LedgerKind { ImpressionCharge, Deposit, RegistrationFee };

struct LedgerEntry {
  LedgerEntryId id;
  std::optional<SponsorId> sponsor;
  std::optional<SubscriberId> subscriber;  // RegistrationFee only
  Money amount;
  LedgerKind kind = LedgerKind::Deposit;
  std::optional<ConfirmationId> confirmation;
  Timestamp at;
};

enum class ConfirmationState { Pending, Redeemed, Expired };

struct PendingConfirmation {
  ConfirmationId id;
  std::string code;
  Msisdn msisdn;
  CategoryId category;
  AdId ad;
  SponsorId sponsor;
  Timestamp issued_at;
  Timestamp expires_at;
  ConfirmationState state = ConfirmationState::Pending;
};

enum class SmsKind { Ad, Content, Answer, System };

/// What an outbound SMS is tied to.
struct Correlation {
  enum class Kind { Confirmation, Question, Payment };
  Kind kind;
  std::int64_t id;

  bool operator==(const Correlation&) const = default;
};

struct DeliveryRecord {
  DeliveryId id;
  Msisdn msisdn;
  SmsKind kind = SmsKind::System;
  std::size_t segments = 0;
  Money cost;
  std::string body;
  Timestamp at;
  std::optional<Correlation> correlation;
  bool charset_warning = false;
};

/// Recorded by the paid-access stub; no money moves.
struct PaymentIntent {
  PaymentIntentId id;
  Msisdn msisdn;
  CategoryId category;
  Money amount;
  Timestamp at;
};

struct AuditEntry {
  AuditId id;
  std::optional<UserId> actor;
  Timestamp at;
  std::string method;
  std::string path;
  std::string entity;
  std::string action;
  std::optional<std::int64_t> target;
  std::string summary;
  std::string payload;  // request JSON with secrets redacted
};

struct AuthToken {
  std::string token;
  UserId user;
  Timestamp issued_at;
  Timestamp expires_at;
};

std::string_view to_string(SubscriberStatus s) noexcept;
std::string_view to_string(QuestionStatus s) noexcept;
std::string_view to_string(SmsRoute r) noexcept;
std::string_view to_string(LedgerKind k) noexcept;
std::string_view to_string(ConfirmationState s) noexcept;
std::string_view to_string(SmsKind k) noexcept;
std::string_view to_string(Correlation::Kind k) noexcept;

}  // namespace mservice

#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace mservice {

/// Row identifier tagged by the entity it refers to, so a SponsorId can't be
/// passed where an AdId is expected.
template <class Tag>
struct Id {
  std::int64_t value{0};

  constexpr Id() = default;
  constexpr explicit Id(std::int64_t v) : value(v) {}

  auto operator<=>(const Id&) const = default;
};

using UserGroupId = Id<struct UserGroupTag>;
using UserId = Id<struct UserTag>;
using SubscriberId = Id<struct SubscriberTag>;
using CategoryId = Id<struct CategoryTag>;
using ContentId = Id<struct ContentTag>;
using QuestionId = Id<struct QuestionTag>;
using AnswerId = Id<struct AnswerTag>;
using ReceivedSmsId = Id<struct ReceivedSmsTag>;
using SponsorId = Id<struct SponsorTag>;
using AdId = Id<struct AdTag>;
using LedgerEntryId = Id<struct LedgerEntryTag>;
using ConfirmationId = Id<struct ConfirmationTag>;
using DeliveryId = Id<struct DeliveryTag>;
using PaymentIntentId = Id<struct PaymentIntentTag>;
using AuditId = Id<struct AuditTag>;

/// Tanzanian shillings. Never negative.
class Money {
 public:
  constexpr Money() = default;
  /// Throws Error(NegativeAmount) for amounts below zero.
  explicit Money(std::int64_t tsh);

  [[nodiscard]] constexpr std::int64_t tsh() const noexcept { return tsh_; }

  Money operator+(Money other) const;
  /// Throws Error(NegativeAmount) if the result would go below zero.
  Money operator-(Money other) const;
  Money operator*(std::int64_t factor) const;
  Money& operator+=(Money other) { return *this = *this + other; }
  Money& operator-=(Money other) { return *this = *this - other; }

  auto operator<=>(const Money&) const = default;

 private:
  std::int64_t tsh_{0};
};

/// Subscriber number in canonical form: 9-15 digits, no leading '+'.
class Msisdn {
 public:
  /// Accepts an optional leading '+'. Throws Error(MalformedMsisdn).
  static Msisdn parse(std::string_view raw);

  [[nodiscard]] const std::string& value() const noexcept { return value_; }

  auto operator<=>(const Msisdn&) const = default;

 private:
  explicit Msisdn(std::string v) : value_(std::move(v)) {}
  std::string value_;
};

inline Msisdn validate_msisdn(std::string_view raw) { return Msisdn::parse(raw); }

using Timestamp = std::chrono::sys_seconds;

[[nodiscard]] std::int64_t to_unix(Timestamp t) noexcept;
[[nodiscard]] Timestamp from_unix(std::int64_t seconds) noexcept;
/// "2026-10-14T09:41:00Z"
[[nodiscard]] std::string to_iso8601(Timestamp t);
/// Accepts either unix seconds or "YYYY-MM-DDTHH:MM:SSZ". Returns nullopt otherwise.
[[nodiscard]] std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Half-open [from, to) interval; either bound may be open.
struct Period {
  std::optional<Timestamp> from;
  std::optional<Timestamp> to;

  [[nodiscard]] bool contains(Timestamp t) const noexcept {
    return (!from || t >= *from) && (!to || t < *to);
  }
};

}  // namespace mservice

template <class Tag>
struct std::hash<mservice::Id<Tag>> {
  std::size_t operator()(const mservice::Id<Tag>& id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};

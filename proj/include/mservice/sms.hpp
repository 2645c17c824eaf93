#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mservice/clock.hpp"
#include "mservice/config.hpp"
#include "mservice/domain.hpp"
#include "mservice/store.hpp"

namespace mservice {

inline constexpr std::size_t kSmsSegmentChars = 160;

struct SmsSegment {
  std::size_t index;  // 1-based
  std::size_t total;
  std::string text;
};

/// Greedy split into 160-character pieces. Plain splitting, no UDH headers.
/// Throws Error(EmptyMessage).
std::vector<SmsSegment> segment_message(std::string_view text);

/// True when every character is in the GSM 03.38 basic character set.
bool is_gsm_basic(std::string_view text);

struct KindTotals {
  std::size_t sms = 0;
  std::size_t segments = 0;
  Money cost;
};

struct CostReport {
  std::size_t total_sms = 0;
  std::size_t total_segments = 0;
  Money total_cost;
  std::map<SmsKind, KindTotals> by_kind;
};

/// Outbound side of the simulated telco: every send succeeds, is costed per
/// segment and lands in the recipient's inbox.
class SmsOutbox {
 public:
  SmsOutbox(Store& store, const Config& config, const Clock& clock);

  DeliveryRecord send_sms(const Msisdn& to, std::string_view text, SmsKind kind,
                          std::optional<Correlation> correlation = std::nullopt);
  /// Validates the raw number first; throws MalformedMsisdn.
  DeliveryRecord send_sms(std::string_view to, std::string_view text, SmsKind kind,
                          std::optional<Correlation> correlation = std::nullopt);

  /// Messages delivered to one handset, oldest first.
  std::vector<DeliveryRecord> inbox(const Msisdn& msisdn) const;

  CostReport cost_report(Period period = {}) const;

 private:
  Store& store_;
  const Config& config_;
  const Clock& clock_;
};

}  // namespace mservice

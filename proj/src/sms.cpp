#include "mservice/sms.hpp"

#include <algorithm>

#include "mservice/error.hpp"
#include "mservice/text.hpp"

namespace mservice {

namespace {

// GSM 03.38 default alphabet, basic table only (no escape extensions).
constexpr std::u32string_view kGsmBasic =
    U"@£$¥èéùìòÇ\nØø\rÅåΔ_ΦΓΛΩΠΨΣΘΞÆæßÉ !\"#¤%&'()*+,-./0123456789:;<=>?"
    U"¡ABCDEFGHIJKLMNOPQRSTUVWXYZÄÖÑÜ§¿abcdefghijklmnopqrstuvwxyzäöñüà";

}  // namespace

std::vector<SmsSegment> segment_message(std::string_view message) {
  if (message.empty()) throw Error(ErrorCode::EmptyMessage);
  auto pieces = text::split(message, kSmsSegmentChars);
  std::vector<SmsSegment> out;
  out.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) out.push_back({i + 1, pieces.size(), std::move(pieces[i])});
  return out;
}

bool is_gsm_basic(std::string_view message) {
  for (char32_t cp : text::decode(message))
    if (kGsmBasic.find(cp) == std::u32string_view::npos) return false;
  return true;
}

SmsOutbox::SmsOutbox(Store& store, const Config& config, const Clock& clock)
    : store_(store), config_(config), clock_(clock) {}

DeliveryRecord SmsOutbox::send_sms(const Msisdn& to, std::string_view message, SmsKind kind,
                                   std::optional<Correlation> correlation) {
  auto segments = segment_message(message);
  DeliveryRecord rec{DeliveryId{},
                     to,
                     kind,
                     segments.size(),
                     config_.sms_unit_cost * static_cast<std::int64_t>(segments.size()),
                     std::string(message),
                     clock_.now(),
                     correlation,
                     !is_gsm_basic(message)};
  rec.id = store_.append_delivery(rec);
  return rec;
}

DeliveryRecord SmsOutbox::send_sms(std::string_view to, std::string_view message, SmsKind kind,
                                   std::optional<Correlation> correlation) {
  return send_sms(Msisdn::parse(to), message, kind, correlation);
}

std::vector<DeliveryRecord> SmsOutbox::inbox(const Msisdn& msisdn) const { return store_.list_deliveries(msisdn); }

CostReport SmsOutbox::cost_report(Period period) const {
  CostReport report;
  for (const auto& d : store_.list_deliveries(std::nullopt, period)) {
    report.total_sms += 1;
    report.total_segments += d.segments;
    report.total_cost += d.cost;
    auto& k = report.by_kind[d.kind];
    k.sms += 1;
    k.segments += d.segments;
    k.cost += d.cost;
  }
  return report;
}

}  // namespace mservice

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mservice/clock.hpp"
#include "mservice/config.hpp"
#include "mservice/crypto.hpp"
#include "mservice/domain.hpp"
#include "mservice/registry.hpp"
#include "mservice/sms.hpp"
#include "mservice/store.hpp"

namespace mservice {

/// Where the sponsor rotation left off.
struct RotationCursor {
  std::optional<SponsorId> last_sponsor;
  std::map<SponsorId, AdId> last_ad;
};

struct AdSelection {
  Ad ad;
  Sponsor sponsor;
  RotationCursor cursor;
};

struct ImpressionRow {
  SponsorId sponsor;
  std::string name;
  std::size_t impressions = 0;
  Money spend;
  Money deposits;
  Money remaining;
};

/// Sponsored-access accounting.
///
/// A sponsor is eligible when it is active, holds at least ads.unit_price_tsh
/// and owns at least one active ad. Eligible sponsors are visited cyclically
/// in id order; within a sponsor its active ads rotate in id order. Each
/// reserved request charges exactly one impression at send time (no refund
/// if the code is never redeemed) and issues a single-use 6-digit code that
/// the subscriber dials back to release the content.
class AdLedger {
 public:
  AdLedger(Store& store, Registry& registry, SmsOutbox& outbox, const Config& config, const Clock& clock,
           std::uint64_t seed);

  /// True iff some sponsor is eligible.
  bool ads_exist() const;

  /// Pure selection against the current store; does not move the ledger's
  /// own cursor. Throws NoActiveSponsor.
  AdSelection next_ad(const RotationCursor& cursor) const;

  /// Charges one impression, issues a Pending confirmation and sends the ad
  /// SMS. Fails with no side effects on NotSubscribed, ConsentRequired,
  /// UnknownCategory, NotALeaf, EmptyCategory or NoActiveSponsor.
  PendingConfirmation reserve_request(const Msisdn& msisdn, CategoryId category);

  /// Marks the matching Pending confirmation Redeemed and returns it.
  /// Throws UnknownCode, WrongMsisdn or ExpiredCode.
  PendingConfirmation redeem_confirmation(const Msisdn& msisdn, std::string_view code);

  /// Returns the new balance. Throws UnknownSponsor, NonPositiveAmount.
  Money deposit(SponsorId sponsor, Money amount);

  /// Per-sponsor impressions and spend within the period plus current balance.
  std::vector<ImpressionRow> impression_report(Period period = {}) const;

  /// Pending confirmations past their TTL become Expired.
  std::size_t expire_confirmations(Timestamp now);

  RotationCursor cursor() const;

  /// The ad body, a dash separator, then "Tuma msimbo: *<service>*<code>#".
  std::string ad_message(const Ad& ad, const std::string& code) const;

 private:
  std::vector<Sponsor> eligible_sponsors() const;
  std::string fresh_code();

  Store& store_;
  Registry& registry_;
  SmsOutbox& outbox_;
  const Config& config_;
  const Clock& clock_;
  SeededRandom codes_;
  mutable std::mutex mutex_;
  RotationCursor cursor_;
};

}  // namespace mservice

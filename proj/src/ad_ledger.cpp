#include "mservice/ad_ledger.hpp"

#include "mservice/error.hpp"

namespace mservice {

AdLedger::AdLedger(Store& store, Registry& registry, SmsOutbox& outbox, const Config& config, const Clock& clock,
                   std::uint64_t seed)
    : store_(store),
      registry_(registry),
      outbox_(outbox),
      config_(config),
      clock_(clock),
      codes_(seed, "confirmation-codes") {}

std::vector<Sponsor> AdLedger::eligible_sponsors() const {
  std::vector<Sponsor> out;
  for (auto& s : store_.list_sponsors()) {
    if (!s.active || s.balance < config_.ad_unit_price) continue;
    if (store_.list_ads(s.id, true).empty()) continue;
    out.push_back(std::move(s));
  }
  return out;
}

bool AdLedger::ads_exist() const { return !eligible_sponsors().empty(); }

AdSelection AdLedger::next_ad(const RotationCursor& cursor) const {
  auto eligible = eligible_sponsors();
  if (eligible.empty()) throw Error(ErrorCode::NoActiveSponsor);

  // list_sponsors is id-ordered, so the first id past the cursor is next
  const Sponsor* chosen = &eligible.front();
  if (cursor.last_sponsor) {
    for (const auto& s : eligible) {
      if (s.id > *cursor.last_sponsor) {
        chosen = &s;
        break;
      }
    }
  }

  auto ads = store_.list_ads(chosen->id, true);
  const Ad* ad = &ads.front();
  if (auto it = cursor.last_ad.find(chosen->id); it != cursor.last_ad.end()) {
    for (const auto& a : ads) {
      if (a.id > it->second) {
        ad = &a;
        break;
      }
    }
  }

  AdSelection sel{*ad, *chosen, cursor};
  sel.cursor.last_sponsor = chosen->id;
  sel.cursor.last_ad[chosen->id] = ad->id;
  return sel;
}

std::string AdLedger::fresh_code() {
  for (;;) {
    auto code = codes_.digits(6);
    if (!store_.find_confirmation_by_code(code, ConfirmationState::Pending)) return code;
  }
}

std::string AdLedger::ad_message(const Ad& ad, const std::string& code) const {
  return ad.body_sw + " — Tuma msimbo: *" + config_.service_code + "*" + code + "#";
}

PendingConfirmation AdLedger::reserve_request(const Msisdn& msisdn, CategoryId category) {
  PendingConfirmation issued = [&] {
    std::lock_guard lock(mutex_);
    return store_.transact([&] {
      auto sub = registry_.active_subscriber(msisdn);
      if (!sub) throw Error(ErrorCode::NotSubscribed, msisdn.value());
      if (!sub->consent_ads) throw Error(ErrorCode::ConsentRequired, msisdn.value());
      if (!registry_.is_leaf(category)) throw Error(ErrorCode::NotALeaf, std::to_string(category.value));
      if (store_.count_active_content(category) == 0)
        throw Error(ErrorCode::EmptyCategory, std::to_string(category.value));

      AdSelection sel = next_ad(cursor_);
      auto now = clock_.now();
      Sponsor sponsor = sel.sponsor;
      sponsor.balance -= config_.ad_unit_price;
      store_.update_sponsor(sponsor);

      PendingConfirmation pc{ConfirmationId{}, fresh_code(), msisdn, category, sel.ad.id, sponsor.id,
                             now,              now + config_.confirmation_ttl, ConfirmationState::Pending};
      pc.id = store_.insert_confirmation(pc);
      store_.append_ledger(LedgerEntry{LedgerEntryId{}, sponsor.id, std::nullopt, config_.ad_unit_price,
                                       LedgerKind::ImpressionCharge, pc.id, now});
      cursor_ = std::move(sel.cursor);
      return pc;
    });
  }();

  auto ad = store_.find_ad(issued.ad);
  outbox_.send_sms(msisdn, ad_message(*ad, issued.code), SmsKind::Ad,
                   Correlation{Correlation::Kind::Confirmation, issued.id.value});
  return issued;
}

PendingConfirmation AdLedger::redeem_confirmation(const Msisdn& msisdn, std::string_view code_view) {
  std::string code(code_view);
  auto [expired, pc] = store_.transact([&]() -> std::pair<bool, PendingConfirmation> {
    auto pending = store_.find_confirmation_by_code(code, ConfirmationState::Pending);
    if (!pending) {
      auto lapsed = store_.find_confirmation_by_code(code, ConfirmationState::Expired);
      if (lapsed && lapsed->msisdn == msisdn) return {true, *lapsed};
      throw Error(ErrorCode::UnknownCode, code);
    }
    if (pending->msisdn != msisdn) throw Error(ErrorCode::WrongMsisdn, code);
    if (clock_.now() >= pending->expires_at) {
      store_.update_confirmation_state(pending->id, ConfirmationState::Expired);
      pending->state = ConfirmationState::Expired;
      return {true, *pending};
    }
    store_.update_confirmation_state(pending->id, ConfirmationState::Redeemed);
    pending->state = ConfirmationState::Redeemed;
    return {false, *pending};
  });
  if (expired) throw Error(ErrorCode::ExpiredCode, code);
  return pc;
}

Money AdLedger::deposit(SponsorId sponsor_id, Money amount) {
  if (amount.tsh() <= 0) throw Error(ErrorCode::NonPositiveAmount);
  std::lock_guard lock(mutex_);
  return store_.transact([&] {
    auto sponsor = store_.find_sponsor(sponsor_id);
    if (!sponsor) throw Error(ErrorCode::UnknownSponsor, std::to_string(sponsor_id.value));
    sponsor->balance += amount;
    store_.update_sponsor(*sponsor);
    store_.append_ledger(
        LedgerEntry{LedgerEntryId{}, sponsor_id, std::nullopt, amount, LedgerKind::Deposit, std::nullopt, clock_.now()});
    return sponsor->balance;
  });
}

std::vector<ImpressionRow> AdLedger::impression_report(Period period) const {
  std::vector<ImpressionRow> rows;
  for (const auto& s : store_.list_sponsors()) {
    ImpressionRow row{s.id, s.name, 0, Money{}, Money{}, s.balance};
    for (const auto& e : store_.list_ledger(s.id)) {
      if (!period.contains(e.at)) continue;
      if (e.kind == LedgerKind::ImpressionCharge) {
        row.impressions += 1;
        row.spend += e.amount;
      } else if (e.kind == LedgerKind::Deposit) {
        row.deposits += e.amount;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t AdLedger::expire_confirmations(Timestamp now) {
  return store_.transact([&] {
    auto stale = store_.list_pending_expired_by(now);
    for (const auto& c : stale) store_.update_confirmation_state(c.id, ConfirmationState::Expired);
    return stale.size();
  });
}

RotationCursor AdLedger::cursor() const {
  std::lock_guard lock(mutex_);
  return cursor_;
}

}  // namespace mservice

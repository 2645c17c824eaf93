#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <random>
#include <thread>

#include "mservice/error.hpp"
#include "support.hpp"

using namespace mservice;
using testkit::Harness;

namespace {

template <class F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::StorageFailure;
}

struct LedgerFixture : ::testing::Test {
  Harness h;
  Msisdn mama = h.subscribe("255712345678");
  Category leaf = h.leaf(std::nullopt, "Lishe", 1);
};

}  // namespace

// ---------------------------------------------------------------- ads_exist

TEST_F(LedgerFixture, AdsExistWithFundedSponsor) {
  h.sponsor("A", 100);
  EXPECT_TRUE(h.svc.ledger().ads_exist());
}

TEST_F(LedgerFixture, AdsExistFalseAtZeroBalance) {
  h.sponsor("A", 0);
  EXPECT_FALSE(h.svc.ledger().ads_exist());
}

TEST_F(LedgerFixture, AdsExistFalseWithoutActiveAds) {
  auto s = h.sponsor("A", 100, 0);
  EXPECT_FALSE(h.svc.ledger().ads_exist());
  auto ad = h.svc.registry().create_ad(s.id, "Tangazo");
  EXPECT_TRUE(h.svc.ledger().ads_exist());
  h.svc.registry().update_ad(ad.id, std::nullopt, false);
  EXPECT_FALSE(h.svc.ledger().ads_exist());
}

TEST_F(LedgerFixture, AdsExistThresholdIsUnitPrice) {
  auto s = h.sponsor("A", 9);
  EXPECT_FALSE(h.svc.ledger().ads_exist());
  h.svc.ledger().deposit(s.id, Money{1});
  EXPECT_TRUE(h.svc.ledger().ads_exist());
}

TEST_F(LedgerFixture, InactiveSponsorIsIneligible) {
  auto s = h.sponsor("A", 100);
  h.svc.registry().update_sponsor(s.id, std::nullopt, std::nullopt, false);
  EXPECT_FALSE(h.svc.ledger().ads_exist());
}

// ---------------------------------------------------------------- next_ad

TEST_F(LedgerFixture, RotationSkipsZeroBalance) {
  auto a = h.sponsor("A", 100);
  h.sponsor("B", 0);
  auto c = h.sponsor("C", 50);
  RotationCursor cursor;
  std::vector<SponsorId> seen;
  for (int i = 0; i < 6; ++i) {
    auto sel = h.svc.ledger().next_ad(cursor);
    seen.push_back(sel.sponsor.id);
    cursor = sel.cursor;
  }
  EXPECT_EQ(seen, (std::vector<SponsorId>{a.id, c.id, a.id, c.id, a.id, c.id}));
}

TEST_F(LedgerFixture, RotationWithinSponsor) {
  auto s = h.sponsor("A", 100, 0);
  auto x = h.svc.registry().create_ad(s.id, "x");
  auto y = h.svc.registry().create_ad(s.id, "y");
  RotationCursor cursor;
  std::vector<AdId> seen;
  for (int i = 0; i < 4; ++i) {
    auto sel = h.svc.ledger().next_ad(cursor);
    seen.push_back(sel.ad.id);
    cursor = sel.cursor;
  }
  EXPECT_EQ(seen, (std::vector<AdId>{x.id, y.id, x.id, y.id}));
}

TEST_F(LedgerFixture, StaleCursorFallsBackToFirst) {
  auto a = h.sponsor("A", 100);
  RotationCursor cursor;
  cursor.last_sponsor = SponsorId(999);
  cursor.last_ad[a.id] = AdId(999);
  auto sel = h.svc.ledger().next_ad(cursor);
  EXPECT_EQ(sel.sponsor.id, a.id);
}

TEST_F(LedgerFixture, NoEligibleSponsor) {
  h.sponsor("A", 5);
  EXPECT_EQ(code_of([&] { h.svc.ledger().next_ad({}); }), ErrorCode::NoActiveSponsor);
}

// ---------------------------------------------------------------- reserve_request

TEST_F(LedgerFixture, ReserveChargesOneImpression) {
  auto a = h.sponsor("A", 100);
  auto pc = h.svc.ledger().reserve_request(mama, leaf.id);
  EXPECT_EQ(pc.state, ConfirmationState::Pending);
  EXPECT_EQ(pc.code.size(), 6u);
  EXPECT_EQ(pc.expires_at - pc.issued_at, std::chrono::seconds(1800));
  EXPECT_EQ(h.balance(a.id).tsh(), 90);
  auto ledger = h.svc.store().list_ledger(a.id);
  ASSERT_EQ(ledger.size(), 2u);  // opening deposit + impression
  EXPECT_EQ(ledger[1].kind, LedgerKind::ImpressionCharge);
  EXPECT_EQ(ledger[1].amount.tsh(), 10);
  EXPECT_EQ(ledger[1].confirmation, pc.id);

  auto inbox = h.svc.outbox().inbox(mama);
  ASSERT_EQ(inbox.size(), 1u);
  EXPECT_EQ(inbox[0].kind, SmsKind::Ad);
  EXPECT_EQ(inbox[0].body, "A tangazo 1 — Tuma msimbo: *31022*" + pc.code + "#");
  EXPECT_EQ(inbox[0].correlation, (Correlation{Correlation::Kind::Confirmation, pc.id.value}));
}

TEST_F(LedgerFixture, ExhaustedHasNoSideEffects) {
  auto a = h.sponsor("A", 10);
  h.svc.ledger().reserve_request(mama, leaf.id);
  EXPECT_FALSE(h.svc.ledger().ads_exist());
  auto before = h.svc.store().count_deliveries();
  EXPECT_EQ(code_of([&] { h.svc.ledger().reserve_request(mama, leaf.id); }), ErrorCode::NoActiveSponsor);
  EXPECT_EQ(h.svc.store().count_deliveries(), before);
  EXPECT_EQ(h.balance(a.id).tsh(), 0);
  EXPECT_EQ(h.impressions(a.id), 1u);
  EXPECT_EQ(h.svc.store().count_confirmations(), 1u);
}

TEST_F(LedgerFixture, PreconditionFailures) {
  auto a = h.sponsor("A", 100);
  auto stranger = Msisdn::parse("255700000001");
  EXPECT_EQ(code_of([&] { h.svc.ledger().reserve_request(stranger, leaf.id); }), ErrorCode::NotSubscribed);
  auto shy = h.subscribe("255700000002", false);
  EXPECT_EQ(code_of([&] { h.svc.ledger().reserve_request(shy, leaf.id); }), ErrorCode::ConsentRequired);
  auto branch = h.category(std::nullopt, "Ujauzito", 2);
  h.leaf(branch.id, "Dalili", 1);
  EXPECT_EQ(code_of([&] { h.svc.ledger().reserve_request(mama, branch.id); }), ErrorCode::NotALeaf);
  auto empty = h.category(std::nullopt, "Tupu", 3);
  EXPECT_EQ(code_of([&] { h.svc.ledger().reserve_request(mama, empty.id); }), ErrorCode::EmptyCategory);
  EXPECT_EQ(code_of([&] { h.svc.ledger().reserve_request(mama, CategoryId(999)); }), ErrorCode::UnknownCategory);
  EXPECT_EQ(h.balance(a.id).tsh(), 100);
  EXPECT_EQ(h.svc.store().count_deliveries(), 0u);
}

TEST_F(LedgerFixture, PendingCodesAreUnique) {
  h.sponsor("A", 100000);
  std::set<std::string> codes;
  for (int i = 0; i < 300; ++i) codes.insert(h.svc.ledger().reserve_request(mama, leaf.id).code);
  EXPECT_EQ(codes.size(), 300u);
}

// ---------------------------------------------------------------- redeem

TEST_F(LedgerFixture, RedeemHappyPath) {
  h.sponsor("A", 100);
  auto pc = h.svc.ledger().reserve_request(mama, leaf.id);
  auto r = h.svc.ledger().redeem_confirmation(mama, pc.code);
  EXPECT_EQ(r.category, leaf.id);
  EXPECT_EQ(r.state, ConfirmationState::Redeemed);
  EXPECT_EQ(h.svc.store().find_confirmation(pc.id)->state, ConfirmationState::Redeemed);
}

TEST_F(LedgerFixture, RedeemTwiceIsUnknown) {
  h.sponsor("A", 100);
  auto pc = h.svc.ledger().reserve_request(mama, leaf.id);
  h.svc.ledger().redeem_confirmation(mama, pc.code);
  EXPECT_EQ(code_of([&] { h.svc.ledger().redeem_confirmation(mama, pc.code); }), ErrorCode::UnknownCode);
}

TEST_F(LedgerFixture, RedeemExpiry) {
  h.sponsor("A", 100);
  auto pc = h.svc.ledger().reserve_request(mama, leaf.id);
  h.advance(1800 + 1);
  EXPECT_EQ(code_of([&] { h.svc.ledger().redeem_confirmation(mama, pc.code); }), ErrorCode::ExpiredCode);
  EXPECT_EQ(h.svc.store().find_confirmation(pc.id)->state, ConfirmationState::Expired);
  // still expired, never redeemable
  EXPECT_EQ(code_of([&] { h.svc.ledger().redeem_confirmation(mama, pc.code); }), ErrorCode::ExpiredCode);
}

TEST_F(LedgerFixture, RedeemJustInsideTtl) {
  h.sponsor("A", 100);
  auto pc = h.svc.ledger().reserve_request(mama, leaf.id);
  h.advance(1800 - 1);
  EXPECT_NO_THROW(h.svc.ledger().redeem_confirmation(mama, pc.code));
}

TEST_F(LedgerFixture, RedeemWrongMsisdn) {
  h.sponsor("A", 100);
  auto pc = h.svc.ledger().reserve_request(mama, leaf.id);
  auto other = h.subscribe("255754000111");
  EXPECT_EQ(code_of([&] { h.svc.ledger().redeem_confirmation(other, pc.code); }), ErrorCode::WrongMsisdn);
  EXPECT_NO_THROW(h.svc.ledger().redeem_confirmation(mama, pc.code));
}

TEST_F(LedgerFixture, ExpiredPendingSweep) {
  h.sponsor("A", 100);
  h.svc.ledger().reserve_request(mama, leaf.id);
  EXPECT_EQ(h.svc.ledger().expire_confirmations(h.clock->now()), 0u);
  h.advance(1800);
  EXPECT_EQ(h.svc.ledger().expire_confirmations(h.clock->now()), 1u);
  EXPECT_EQ(h.balance(h.svc.store().list_sponsors()[0].id).tsh(), 90);  // no refund
}

TEST_F(LedgerFixture, ConcurrentRedeemSingleUse) {
  h.sponsor("A", 100000);
  for (int round = 0; round < 20; ++round) {
    auto pc = h.svc.ledger().reserve_request(mama, leaf.id);
    std::atomic<int> ok{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t)
      threads.emplace_back([&] {
        try {
          h.svc.ledger().redeem_confirmation(mama, pc.code);
          ++ok;
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::UnknownCode);
        }
      });
    for (auto& t : threads) t.join();
    ASSERT_EQ(ok.load(), 1) << "round " << round;
  }
}

// ---------------------------------------------------------------- deposit

TEST_F(LedgerFixture, Deposits) {
  auto a = h.sponsor("A", 0);
  EXPECT_EQ(h.svc.ledger().deposit(a.id, Money{500}).tsh(), 500);
  auto b = h.sponsor("B", 100);
  EXPECT_EQ(h.svc.ledger().deposit(b.id, Money{250}).tsh(), 350);
  EXPECT_EQ(code_of([&] { h.svc.ledger().deposit(a.id, Money{0}); }), ErrorCode::NonPositiveAmount);
  EXPECT_EQ(code_of([&] { h.svc.ledger().deposit(SponsorId(404), Money{1}); }), ErrorCode::UnknownSponsor);
  EXPECT_EQ(h.balance(a.id).tsh(), 500);
}

// ---------------------------------------------------------------- impression_report

TEST_F(LedgerFixture, ImpressionReportOracle) {
  auto a = h.sponsor("A", 100);
  for (int i = 0; i < 3; ++i) h.svc.ledger().reserve_request(mama, leaf.id);
  auto rows = h.svc.ledger().impression_report();
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].sponsor, a.id);
  EXPECT_EQ(rows[0].impressions, 3u);
  EXPECT_EQ(rows[0].spend.tsh(), 30);
  EXPECT_EQ(rows[0].remaining.tsh(), 70);
  EXPECT_EQ(rows[0].deposits.tsh(), 100);
}

TEST_F(LedgerFixture, ImpressionReportNoActivity) {
  h.sponsor("A", 0);
  auto rows = h.svc.ledger().impression_report();
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].impressions, 0u);
  EXPECT_EQ(rows[0].spend.tsh(), 0);
  EXPECT_EQ(rows[0].remaining.tsh(), 0);
}

TEST_F(LedgerFixture, ImpressionReportCrossFoots) {
  h.sponsor("A", 100);
  h.sponsor("B", 70);
  for (int i = 0; i < 9; ++i) h.svc.ledger().reserve_request(mama, leaf.id);
  std::size_t impressions = 0;
  std::int64_t spend = 0;
  for (const auto& r : h.svc.ledger().impression_report()) {
    impressions += r.impressions;
    spend += r.spend.tsh();
    EXPECT_EQ(r.spend.tsh() + r.remaining.tsh(), r.deposits.tsh());
  }
  std::size_t charges = 0;
  std::int64_t charged = 0;
  for (const auto& e : h.svc.store().list_ledger())
    if (e.kind == LedgerKind::ImpressionCharge) ++charges, charged += e.amount.tsh();
  EXPECT_EQ(impressions, charges);
  EXPECT_EQ(spend, charged);
}

TEST_F(LedgerFixture, ImpressionReportPeriod) {
  h.sponsor("A", 100);
  h.svc.ledger().reserve_request(mama, leaf.id);
  h.advance(3600);
  h.svc.ledger().reserve_request(mama, leaf.id);
  Period p{from_unix(testkit::kStart + 1800), std::nullopt};
  EXPECT_EQ(h.svc.ledger().impression_report(p)[0].impressions, 1u);
}

// ---------------------------------------------------------------- properties

// With static eligibility, n·|eligible| consecutive reserves give each
// eligible sponsor exactly n impressions.
TEST(LedgerProperties, RotationFairness) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 15; ++trial) {
    Harness h;
    auto mama = h.subscribe("255712345678");
    auto leaf = h.leaf(std::nullopt, "L", 1);
    const int n = 1 + static_cast<int>(rng() % 4);
    std::vector<Sponsor> sponsors;
    std::vector<bool> eligible;
    for (int i = 0; i < 2 + static_cast<int>(rng() % 4); ++i) {
      bool fund = rng() % 3 != 0;
      // funded sponsors keep >= 10 after all n charges so eligibility is static
      sponsors.push_back(h.sponsor("S" + std::to_string(i), fund ? 10 * n + 10 : 9, 1 + static_cast<int>(rng() % 3)));
      eligible.push_back(fund);
    }
    std::size_t k = std::count(eligible.begin(), eligible.end(), true);
    if (k == 0) continue;
    for (std::size_t i = 0; i < n * k; ++i) h.svc.ledger().reserve_request(mama, leaf.id);
    for (std::size_t i = 0; i < sponsors.size(); ++i)
      EXPECT_EQ(h.impressions(sponsors[i].id), eligible[i] ? static_cast<std::size_t>(n) : 0u) << "trial " << trial;
  }
}

// ads_exist() holds exactly when next_ad() succeeds.
TEST(LedgerProperties, AdsExistMatchesNextAd) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    Harness h;
    int count = static_cast<int>(rng() % 4);
    for (int i = 0; i < count; ++i) {
      auto s = h.sponsor("S" + std::to_string(i), static_cast<std::int64_t>(rng() % 25), static_cast<int>(rng() % 3));
      if (rng() % 4 == 0) h.svc.registry().update_sponsor(s.id, std::nullopt, std::nullopt, false);
      for (const auto& ad : h.svc.store().list_ads(s.id, false))
        if (rng() % 3 == 0) h.svc.registry().update_ad(ad.id, std::nullopt, false);
    }
    bool exists = h.svc.ledger().ads_exist();
    bool selectable = true;
    try {
      auto sel = h.svc.ledger().next_ad({});
      EXPECT_GE(sel.sponsor.balance.tsh(), 10);
      EXPECT_TRUE(sel.ad.active);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NoActiveSponsor);
      selectable = false;
    }
    EXPECT_EQ(exists, selectable) << "trial " << trial;
  }
}

// Independent replay: initial (0) + deposits - impressions x price equals
// the stored balance for every sponsor after a random mixed workload.
TEST(LedgerProperties, ConservationReplay) {
  Harness h;
  std::vector<Msisdn> subs{h.subscribe("255712345678"), h.subscribe("255754000111")};
  std::vector<CategoryId> leaves{h.leaf(std::nullopt, "L1", 1).id, h.leaf(std::nullopt, "L2", 2).id};
  std::vector<SponsorId> sponsors;
  for (int i = 0; i < 4; ++i) sponsors.push_back(h.sponsor("S" + std::to_string(i), 0).id);
  std::map<SponsorId, std::int64_t> deposits, charges;
  std::mt19937_64 rng(12);
  for (int op = 0; op < 2000; ++op) {
    if (rng() % 3 == 0) {
      auto s = sponsors[rng() % sponsors.size()];
      auto amount = static_cast<std::int64_t>(rng() % 40);
      try {
        h.svc.ledger().deposit(s, Money{amount});
        deposits[s] += amount;
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::NonPositiveAmount);
      }
    } else {
      try {
        auto pc = h.svc.ledger().reserve_request(subs[rng() % 2], leaves[rng() % 2]);
        charges[pc.sponsor] += 10;
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::NoActiveSponsor);
      }
    }
    for (auto s : sponsors) ASSERT_GE(h.balance(s).tsh(), 0);
  }
  for (auto s : sponsors) {
    std::int64_t replay = 0;
    for (const auto& e : h.svc.store().list_ledger(s))
      replay += e.kind == LedgerKind::Deposit ? e.amount.tsh() : -e.amount.tsh();
    EXPECT_EQ(replay, h.balance(s).tsh());
    EXPECT_EQ(deposits[s] - charges[s], h.balance(s).tsh());
  }
}

TEST(LedgerProperties, ConcurrentReserveAtomicity) {
  Harness h;
  auto mama = h.subscribe("255712345678");
  auto leaf = h.leaf(std::nullopt, "L", 1);
  auto s = h.sponsor("A", 70);  // seven impressions
  std::atomic<int> ok{0}, none{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 16; ++t)
    threads.emplace_back([&] {
      try {
        h.svc.ledger().reserve_request(mama, leaf.id);
        ++ok;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoActiveSponsor) ++none;
      }
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 7);
  EXPECT_EQ(none.load(), 9);
  EXPECT_EQ(h.balance(s.id).tsh(), 0);
  EXPECT_EQ(h.impressions(s.id), 7u);
}

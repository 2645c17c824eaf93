// Segmentation, charset lint, outbox accounting. The segment counts are
// checked against a plain integer ceil-division oracle.

#include <gtest/gtest.h>

#include <random>

#include "mservice/error.hpp"
#include "mservice/sms.hpp"
#include "mservice/store.hpp"
#include "mservice/text.hpp"
#include "support.hpp"

using namespace mservice;

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::string random_ascii(std::mt19937_64& rng, std::size_t len) {
  std::uniform_int_distribution<int> ch(0x20, 0x7e);
  std::string s(len, ' ');
  for (auto& c : s) c = static_cast<char>(ch(rng));
  return s;
}

}  // namespace

TEST(Text, Utf8Length) {
  EXPECT_EQ(text::length("abc"), 3u);
  EXPECT_EQ(text::length("é"), 1u);
  EXPECT_EQ(text::length("—"), 1u);
  EXPECT_EQ(text::length(""), 0u);
}

TEST(Text, SplitKeepsMultibyteIntact) {
  std::string s;
  for (int i = 0; i < 5; ++i) s += "aé";
  auto parts = text::split(s, 3);
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[0], "aéa");
  std::string joined;
  for (auto& p : parts) joined += p;
  EXPECT_EQ(joined, s);
}

TEST(Text, Helpers) {
  EXPECT_EQ(text::trim("  x y \n"), "x y");
  EXPECT_EQ(text::upper_ascii("jiunge"), "JIUNGE");
  EXPECT_TRUE(text::all_digits("0123"));
  EXPECT_FALSE(text::all_digits("01a"));
  EXPECT_FALSE(text::all_digits(""));
  EXPECT_EQ(text::take("habari", 3), "hab");
}

TEST(Segment, Boundaries) {
  EXPECT_EQ(segment_message(std::string(160, 'a')).size(), 1u);
  auto two = segment_message(std::string(161, 'a'));
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].text.size(), 160u);
  EXPECT_EQ(two[1].text.size(), 1u);
  EXPECT_EQ(two[0].index, 1u);
  EXPECT_EQ(two[1].index, 2u);
  EXPECT_EQ(two[1].total, 2u);
  EXPECT_EQ(segment_message(std::string(350, 'b')).size(), 3u);
}

TEST(Segment, EmptyIsRejected) {
  try {
    segment_message("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMessage);
  }
}

TEST(Segment, RandomRoundTripProperty) {
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<std::size_t> len(1, 2000);
  for (int trial = 0; trial < 1000; ++trial) {
    auto s = random_ascii(rng, len(rng));
    auto segs = segment_message(s);
    std::string joined;
    for (const auto& seg : segs) {
      ASSERT_LE(seg.text.size(), 160u);
      ASSERT_FALSE(seg.text.empty());
      joined += seg.text;
    }
    ASSERT_EQ(joined, s);
    ASSERT_EQ(segs.size(), ceil_div(s.size(), 160));
  }
}

TEST(Charset, GsmBasic) {
  EXPECT_TRUE(is_gsm_basic("Habari mama! Kliniki ni kesho saa 3."));
  EXPECT_TRUE(is_gsm_basic("@£$¥èéùìòÇØøÅåΔ_ΦΓΛΩΠΨΣΘΞÆæßÉ"));
  EXPECT_FALSE(is_gsm_basic("tangazo — msimbo"));
  EXPECT_FALSE(is_gsm_basic("emoji 🙂"));
  EXPECT_FALSE(is_gsm_basic("{braces}"));  // extension table, not basic
}

class OutboxTest : public ::testing::Test {
 protected:
  testkit::Harness h;
};

TEST_F(OutboxTest, CostIsSegmentsTimesUnit) {
  auto rec = h.svc.outbox().send_sms("255712345678", std::string(100, 'x'), SmsKind::Content);
  EXPECT_EQ(rec.segments, 1u);
  EXPECT_EQ(rec.cost.tsh(), 25);
  auto big = h.svc.outbox().send_sms("255712345678", std::string(350, 'x'), SmsKind::Content);
  EXPECT_EQ(big.segments, 3u);
  EXPECT_EQ(big.cost.tsh(), 75);
  EXPECT_FALSE(big.charset_warning);
}

TEST_F(OutboxTest, CharsetWarningIsAdvisory) {
  auto rec = h.svc.outbox().send_sms("255712345678", "tangazo — habari", SmsKind::Ad);
  EXPECT_TRUE(rec.charset_warning);
  EXPECT_EQ(h.svc.outbox().inbox(Msisdn::parse("255712345678")).size(), 1u);
}

TEST_F(OutboxTest, RejectsBadInput) {
  EXPECT_THROW(h.svc.outbox().send_sms("abc", "hi", SmsKind::System), Error);
  EXPECT_THROW(h.svc.outbox().send_sms("255712345678", "", SmsKind::System), Error);
  EXPECT_EQ(h.svc.store().count_deliveries(), 0u);
}

TEST_F(OutboxTest, InboxCompletenessAndOrder) {
  auto a = Msisdn::parse("255712345678");
  auto b = Msisdn::parse("255754000111");
  for (int i = 0; i < 5; ++i) {
    h.svc.outbox().send_sms(a, "a" + std::to_string(i), SmsKind::System);
    h.svc.outbox().send_sms(b, "b" + std::to_string(i), SmsKind::System);
  }
  auto ia = h.svc.outbox().inbox(a);
  ASSERT_EQ(ia.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(ia[i].body, "a" + std::to_string(i));
  EXPECT_EQ(h.svc.store().list_deliveries().size(), 10u);
}

TEST_F(OutboxTest, CostReportArithmeticOracle) {
  testkit::Harness local([] {
    auto c = testkit::test_config();
    c.sms_unit_cost = Money{25};
    return c;
  }());
  auto m = Msisdn::parse("255712345678");
  local.svc.outbox().send_sms(m, std::string(160, 'a'), SmsKind::Ad);
  local.svc.outbox().send_sms(m, std::string(320, 'b'), SmsKind::Content);
  local.svc.outbox().send_sms(m, std::string(480, 'c'), SmsKind::Content);
  auto r = local.svc.outbox().cost_report();
  EXPECT_EQ(r.total_sms, 3u);
  EXPECT_EQ(r.total_segments, 6u);
  EXPECT_EQ(r.total_cost.tsh(), 150);
  EXPECT_EQ(r.by_kind[SmsKind::Ad].segments, 1u);
  EXPECT_EQ(r.by_kind[SmsKind::Content].segments, 5u);
}

TEST_F(OutboxTest, EmptyPeriodIsZero) {
  h.svc.outbox().send_sms("255712345678", "x", SmsKind::System);
  Period later{from_unix(testkit::kStart + 3600), std::nullopt};
  auto r = h.svc.outbox().cost_report(later);
  EXPECT_EQ(r.total_sms, 0u);
  EXPECT_EQ(r.total_segments, 0u);
  EXPECT_EQ(r.total_cost.tsh(), 0);
}

TEST_F(OutboxTest, ByKindCrossFootsForRandomLogs) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<std::size_t> len(1, 700);
  std::size_t segments_oracle = 0;
  for (int i = 0; i < 200; ++i) {
    auto n = len(rng);
    segments_oracle += ceil_div(n, 160);
    h.svc.outbox().send_sms("255712345678", random_ascii(rng, n), static_cast<SmsKind>(kind(rng)));
  }
  auto r = h.svc.outbox().cost_report();
  std::size_t sms = 0, segs = 0;
  std::int64_t cost = 0;
  for (const auto& [k, t] : r.by_kind) {
    sms += t.sms;
    segs += t.segments;
    cost += t.cost.tsh();
  }
  EXPECT_EQ(sms, r.total_sms);
  EXPECT_EQ(segs, r.total_segments);
  EXPECT_EQ(cost, r.total_cost.tsh());
  EXPECT_EQ(r.total_segments, segments_oracle);
  EXPECT_EQ(r.total_cost.tsh(), static_cast<std::int64_t>(segments_oracle) * 25);
}

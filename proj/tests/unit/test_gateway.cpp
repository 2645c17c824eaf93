#include <gtest/gtest.h>

#include "mservice/error.hpp"
#include "support.hpp"

using namespace mservice;
using testkit::Harness;

namespace {

HttpResponse post(Service& svc, const std::string& path, const Json& body) {
  return svc.handle(HttpRequest{"POST", path, {}, {{"content-type", "application/json"}}, body.dump()});
}

HttpResponse get(Service& svc, const std::string& path, std::map<std::string, std::string> query = {}) {
  return svc.handle(HttpRequest{"GET", path, std::move(query), {}, {}});
}

Json ussd_body(const std::string& msisdn, const Json& session, const std::string& text) {
  Json j;
  j["msisdn"] = msisdn;
  j["session"] = session;
  j["text"] = text;
  return j;
}

struct GatewayFixture : ::testing::Test {
  Harness h;
  GatewaySim& gw() { return h.svc.gateway(); }
};

}  // namespace

// ---------------------------------------------------------------- inbound SMS

TEST_F(GatewayFixture, JiungeRegistersAndWelcomes) {
  auto r = gw().receive_sms("255712345678", "15050", "jiunge");
  EXPECT_EQ(r.routed_as, SmsRoute::Registration);
  EXPECT_EQ(r.outcome, "registered");
  auto sub = h.svc.registry().active_subscriber(Msisdn::parse("255712345678"));
  ASSERT_TRUE(sub);
  EXPECT_TRUE(sub->consent_ads);
  auto inbox = h.svc.outbox().inbox(sub->msisdn);
  ASSERT_EQ(inbox.size(), 1u);
  EXPECT_EQ(inbox[0].kind, SmsKind::System);
  EXPECT_EQ(inbox[0].body, gw().welcome_message());
  EXPECT_EQ(gw().receive_sms("255712345678", "15050", "JIUNGE").outcome, "already_registered");
}

TEST_F(GatewayFixture, AchaUnsubscribes) {
  gw().receive_sms("255712345678", "15050", "JIUNGE");
  EXPECT_EQ(gw().receive_sms("255712345678", "15050", "ACHA").outcome, "unsubscribed");
  EXPECT_FALSE(h.svc.registry().active_subscriber(Msisdn::parse("255712345678")));
  EXPECT_EQ(gw().receive_sms("255712345678", "15050", "ACHA").outcome, "not_subscribed");
}

TEST_F(GatewayFixture, QuestionShortcode) {
  h.subscribe("255712345678");
  auto r = gw().receive_sms("255712345678", "15051", "Je, naweza kufanya mazoezi?");
  EXPECT_EQ(r.routed_as, SmsRoute::Question);
  auto open = h.svc.store().list_questions(QuestionStatus::Open);
  ASSERT_EQ(open.size(), 1u);
  EXPECT_EQ(r.outcome, "question:" + std::to_string(open[0].id.value));
  EXPECT_EQ(open[0].text, "Je, naweza kufanya mazoezi?");
}

TEST_F(GatewayFixture, QuestionFromStrangerIsUnrecognized) {
  auto r = gw().receive_sms("255700000001", "15051", "Swali?");
  EXPECT_EQ(r.routed_as, SmsRoute::Unrecognized);
  EXPECT_EQ(r.outcome, "NotSubscribed");
  EXPECT_EQ(h.svc.store().count_questions(std::nullopt), 0u);
  auto log = h.svc.store().list_received_sms();
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].routed_as, SmsRoute::Unrecognized);
}

TEST_F(GatewayFixture, EmptyQuestion) {
  h.subscribe("255712345678");
  EXPECT_EQ(gw().receive_sms("255712345678", "15051", "  ").outcome, "EmptyText");
}

TEST_F(GatewayFixture, UnknownShortcodeHasNoSideEffects) {
  auto r = gw().receive_sms("255712345678", "99999", "JIUNGE");
  EXPECT_EQ(r.routed_as, SmsRoute::Unrecognized);
  EXPECT_EQ(r.outcome, "unknown_shortcode");
  EXPECT_EQ(h.svc.store().count_subscribers(), 0u);
  EXPECT_EQ(h.svc.store().count_deliveries(), 0u);
  EXPECT_EQ(h.svc.store().list_received_sms().size(), 1u);
}

TEST_F(GatewayFixture, UnknownKeywordAndMalformedSender) {
  EXPECT_EQ(gw().receive_sms("255712345678", "15050", "habari").outcome, "unknown_keyword");
  auto r = gw().receive_sms("not-a-number", "15050", "JIUNGE");
  EXPECT_EQ(r.routed_as, SmsRoute::Unrecognized);
  EXPECT_EQ(r.outcome, "MalformedMsisdn");
  auto log = h.svc.store().list_received_sms();
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log[1].msisdn, "not-a-number");
}

TEST_F(GatewayFixture, CodeBySms) {
  auto mama = h.subscribe("255712345678");
  auto leaf = h.leaf(std::nullopt, "L", 1, {"Taarifa"});
  h.sponsor("A", 100);
  auto pc = h.svc.ledger().reserve_request(mama, leaf.id);
  auto r = gw().receive_sms("255712345678", "15050", pc.code);
  EXPECT_EQ(r.routed_as, SmsRoute::ConfirmationCode);
  EXPECT_EQ(r.outcome, "delivered");
  EXPECT_EQ(gw().receive_sms("255712345678", "15050", pc.code).outcome, "UnknownCode");
  EXPECT_EQ(h.svc.store().count_deliveries(SmsKind::Content), 1u);
}

TEST_F(GatewayFixture, EveryInboundMessageLoggedOnce) {
  h.subscribe("255712345678");
  gw().receive_sms("255712345678", "15051", "a");
  gw().receive_sms("255754000111", "15050", "JIUNGE");
  gw().receive_sms("255754000111", "1", "x");
  gw().receive_sms("bad", "15051", "y");
  auto log = h.svc.store().list_received_sms();
  ASSERT_EQ(log.size(), 4u);
  EXPECT_EQ(log[0].routed_as, SmsRoute::Question);
  EXPECT_EQ(log[1].routed_as, SmsRoute::Registration);
  EXPECT_EQ(log[2].routed_as, SmsRoute::Unrecognized);
  EXPECT_EQ(log[3].routed_as, SmsRoute::Unrecognized);
}

// Replaying the inbound log into a fresh service reproduces the same
// registrations and questions.
TEST(GatewayReplay, InboundLogReproducesRecords) {
  Harness a;
  a.svc.gateway().receive_sms("255712345678", "15050", "JIUNGE");
  a.svc.gateway().receive_sms("255712345678", "15051", "Swali la kwanza");
  a.svc.gateway().receive_sms("255754000111", "15051", "Sijasajiliwa");
  a.svc.gateway().receive_sms("255754000111", "15050", "JIUNGE");
  a.svc.gateway().receive_sms("255754000111", "15051", "Swali la pili");
  a.svc.gateway().receive_sms("255712345678", "15050", "ACHA");

  Harness b;
  for (const auto& m : a.svc.store().list_received_sms()) b.svc.gateway().receive_sms(m.msisdn, m.shortcode, m.text);

  auto subs = [](Harness& h) {
    std::vector<std::string> out;
    for (const auto& s : h.svc.store().list_subscribers(0, 100))
      out.push_back(s.msisdn.value() + std::string(to_string(s.status)) + (s.consent_ads ? "+" : "-"));
    return out;
  };
  auto questions = [](Harness& h) {
    std::vector<std::string> out;
    for (const auto& q : h.svc.store().list_questions(std::nullopt))
      out.push_back(std::to_string(q.subscriber.value) + ":" + q.text);
    return out;
  };
  auto routes = [](Harness& h) {
    std::vector<std::string> out;
    for (const auto& m : h.svc.store().list_received_sms())
      out.push_back(std::string(to_string(m.routed_as)) + " " + m.outcome);
    return out;
  };
  EXPECT_EQ(subs(a), subs(b));
  EXPECT_EQ(questions(a), questions(b));
  EXPECT_EQ(routes(a), routes(b));
  EXPECT_EQ(questions(a).size(), 2u);
}

// ---------------------------------------------------------------- USSD channel

TEST_F(GatewayFixture, DialAndContinue) {
  h.subscribe("255712345678");
  h.leaf(std::nullopt, "Ujauzito", 1);
  auto r = gw().ussd_request("255712345678", "", "*31022#");
  EXPECT_FALSE(r.error);
  EXPECT_EQ(r.reply.text, replies::kConsent);
  EXPECT_EQ(r.reply.disposition, Disposition::Continue);
  auto next = gw().ussd_request("255712345678", r.reply.session_id, "1");
  EXPECT_EQ(next.reply.text, "1. Ujauzito");
}

TEST_F(GatewayFixture, ExpiredSessionIsUnknown) {
  h.subscribe("255712345678");
  h.leaf(std::nullopt, "Ujauzito", 1);
  auto r = gw().ussd_request("255712345678", "", "*31022#");
  h.advance(91);
  auto next = gw().ussd_request("255712345678", r.reply.session_id, "1");
  ASSERT_TRUE(next.error);
  EXPECT_EQ(*next.error, ErrorCode::UnknownSession);
  EXPECT_EQ(next.reply.disposition, Disposition::End);
}

TEST_F(GatewayFixture, SessionBelongsToCaller) {
  h.subscribe("255712345678");
  h.subscribe("255754000111");
  h.leaf(std::nullopt, "Ujauzito", 1);
  auto r = gw().ussd_request("255712345678", "", "*31022#");
  auto hijack = gw().ussd_request("255754000111", r.reply.session_id, "1");
  ASSERT_TRUE(hijack.error);
  EXPECT_EQ(*hijack.error, ErrorCode::UnknownSession);
  EXPECT_EQ(h.svc.sessions().session(r.reply.session_id)->state, SessionState::AwaitConsent);
}

TEST_F(GatewayFixture, WireErrors) {
  h.subscribe("255712345678");
  EXPECT_EQ(gw().ussd_request("255712345678", "", "31022").error, ErrorCode::MalformedCode);
  EXPECT_EQ(gw().ussd_request("255712345678", "", "*150#").error, ErrorCode::WrongServiceCode);
  EXPECT_EQ(gw().ussd_request("12ab", "", "*31022#").error, ErrorCode::MalformedMsisdn);
  gw().ussd_request("255712345678", "", "*31022#");
  EXPECT_EQ(gw().ussd_request("255712345678", "", "*31022#").error, ErrorCode::SessionAlreadyOpen);
}

// ---------------------------------------------------------------- HTTP

TEST_F(GatewayFixture, HttpUssdRoundTrip) {
  h.subscribe("255712345678");
  h.leaf(std::nullopt, "Ujauzito", 1);
  auto r = post(h.svc, "/sim/ussd", ussd_body("255712345678", nullptr, "*31022#"));
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = r.json();
  EXPECT_EQ(j["reply"], std::string(replies::kConsent));
  EXPECT_EQ(j["continue"], true);
  auto sid = j["session"].get<std::string>();
  EXPECT_FALSE(sid.empty());
  EXPECT_FALSE(j.contains("error"));
  auto n = post(h.svc, "/sim/ussd", ussd_body("255712345678", sid, "1")).json();
  EXPECT_EQ(n["reply"], "1. Ujauzito");
  EXPECT_EQ(n["session"], sid);
}

TEST_F(GatewayFixture, HttpUssdErrorEnvelope) {
  auto j = post(h.svc, "/sim/ussd", ussd_body("255712345678", "nope", "1")).json();
  EXPECT_EQ(j["continue"], false);
  EXPECT_EQ(j["error"], "UnknownSession");
  auto bad = post(h.svc, "/sim/ussd", Json{{"session", nullptr}});
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.json()["error"], "BadRequest");
  auto garbage = h.svc.handle(HttpRequest{"POST", "/sim/ussd", {}, {}, "{nope"});
  EXPECT_EQ(garbage.status, 400);
}

TEST_F(GatewayFixture, HttpSmsAndInbox) {
  Json body;
  body["msisdn"] = "255712345678";
  body["shortcode"] = "15050";
  body["text"] = "JIUNGE";
  auto r = post(h.svc, "/sim/sms", body);
  ASSERT_EQ(r.status, 200);
  auto j = r.json();
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["routed_as"], "Registration");
  EXPECT_EQ(j["outcome"], "registered");

  auto inbox = get(h.svc, "/sim/inbox/255712345678").json();
  ASSERT_EQ(inbox["messages"].size(), 1u);
  const auto& m = inbox["messages"][0];
  for (const char* key : {"id", "kind", "body", "segments", "at"}) EXPECT_TRUE(m.contains(key)) << key;
  EXPECT_EQ(m["kind"], "System");
  EXPECT_EQ(m["at"], "2026-01-01T08:00:00Z");
  EXPECT_EQ(get(h.svc, "/sim/inbox/abc").status, 400);
}

TEST_F(GatewayFixture, HttpDeliveriesReport) {
  h.svc.outbox().send_sms("255712345678", std::string(200, 'a'), SmsKind::Content);
  h.advance(100);
  h.svc.outbox().send_sms("255754000111", "b", SmsKind::Ad);
  auto all = get(h.svc, "/sim/deliveries").json();
  EXPECT_EQ(all["total_sms"], 2);
  EXPECT_EQ(all["total_segments"], 3);
  EXPECT_EQ(all["total_cost"], 75);
  EXPECT_EQ(all["by_kind"]["Content"]["segments"], 2);
  EXPECT_EQ(all["deliveries"].size(), 2u);
  auto late = get(h.svc, "/sim/deliveries", {{"from", std::to_string(testkit::kStart + 50)}}).json();
  EXPECT_EQ(late["total_sms"], 1);
  auto one = get(h.svc, "/sim/deliveries", {{"msisdn", "255712345678"}}).json();
  EXPECT_EQ(one["deliveries"].size(), 1u);
  EXPECT_EQ(get(h.svc, "/sim/deliveries", {{"from", "yesterday"}}).status, 400);
}

TEST_F(GatewayFixture, HttpRoutingErrors) {
  EXPECT_EQ(get(h.svc, "/sim/ussd").status, 405);
  EXPECT_EQ(post(h.svc, "/sim/inbox/255712345678", Json::object()).status, 405);
  EXPECT_EQ(get(h.svc, "/sim/nothing").status, 404);
  EXPECT_EQ(get(h.svc, "/elsewhere").status, 404);
  auto health = get(h.svc, "/health").json();
  EXPECT_EQ(health["status"], "ok");
}

// Replaying recorded wire requests against a fresh store reproduces the
// reply payloads byte for byte.
TEST(GatewayReplay, WireTranscriptIsIdempotent) {
  auto setup = [](Harness& h) {
    h.subscribe("255712345678");
    auto root = h.category(std::nullopt, "Ujauzito", 1);
    h.leaf(root.id, "Lishe", 1, {"a", "b", "c"});
    h.sponsor("A", 100);
    h.sponsor("B", 100);
  };
  std::vector<std::pair<std::string, Json>> recorded;
  std::vector<std::string> replies_a;
  {
    Harness a;
    setup(a);
    auto send = [&](const std::string& path, const Json& body) {
      recorded.emplace_back(path, body);
      replies_a.push_back(post(a.svc, path, body).body);
      a.advance(1);
      return Json::parse(replies_a.back());
    };
    for (int round = 0; round < 3; ++round) {
      auto sid = send("/sim/ussd", ussd_body("255712345678", nullptr, "*31022#"))["session"].get<std::string>();
      send("/sim/ussd", ussd_body("255712345678", sid, "1"));
      send("/sim/ussd", ussd_body("255712345678", sid, "1"));
      send("/sim/ussd", ussd_body("255712345678", sid, "1"));
      auto code = testkit::last_code(a.svc, Msisdn::parse("255712345678"));
      send("/sim/ussd", ussd_body("255712345678", nullptr, "*31022*" + code + "#"));
    }
    replies_a.push_back(get(a.svc, "/sim/inbox/255712345678").body);
  }
  Harness b;
  setup(b);
  std::vector<std::string> replies_b;
  for (const auto& [path, body] : recorded) {
    replies_b.push_back(post(b.svc, path, body).body);
    b.advance(1);
  }
  replies_b.push_back(get(b.svc, "/sim/inbox/255712345678").body);
  EXPECT_EQ(replies_a, replies_b);
}

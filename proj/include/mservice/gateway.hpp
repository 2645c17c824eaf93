#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mservice/ad_ledger.hpp"
#include "mservice/content_catalog.hpp"
#include "mservice/http_types.hpp"
#include "mservice/registry.hpp"
#include "mservice/session_engine.hpp"
#include "mservice/sms.hpp"

namespace mservice {

struct SmsResult {
  SmsRoute routed_as = SmsRoute::Unrecognized;
  std::string outcome;
};

/// Reply to a USSD request on the simulated wire. `error` is set when the
/// request failed before or outside a session.
struct UssdWireReply {
  UssdReply reply;
  std::optional<ErrorCode> error;
};

/// Simulated telco: inbound SMS routing, the USSD channel and the /sim/*
/// HTTP handlers the web console talks to.
class GatewaySim {
 public:
  GatewaySim(Store& store, Registry& registry, SessionEngine& sessions, AdLedger& ledger, ContentCatalog& catalog,
             SmsOutbox& outbox, const Config& config, const Clock& clock);

  /// Routes by shortcode and keyword, then logs the message with where it
  /// went and what happened. Never throws for bad input; malformed senders
  /// are logged as Unrecognized.
  SmsResult receive_sms(std::string_view from, std::string_view shortcode, std::string_view text);

  /// An empty `session_id` means `text` is a dial string. Failures come
  /// back as an ended reply carrying the error code.
  UssdWireReply ussd_request(std::string_view msisdn, std::string_view session_id, std::string_view text);

  /// Handles /sim/* and /health; nullopt for any other path.
  std::optional<HttpResponse> handle(const HttpRequest& req);

  std::string welcome_message() const;

 private:
  SmsResult route_registration(const Msisdn& from, std::string_view text);
  SmsResult route_question(const Msisdn& from, std::string_view text);
  HttpResponse sim_ussd(const HttpRequest& req);
  HttpResponse sim_sms(const HttpRequest& req);

  Store& store_;
  Registry& registry_;
  SessionEngine& sessions_;
  AdLedger& ledger_;
  ContentCatalog& catalog_;
  SmsOutbox& outbox_;
  const Config& config_;
  const Clock& clock_;
};

}  // namespace mservice

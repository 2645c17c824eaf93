#include "mservice/gateway.hpp"

#include "mservice/text.hpp"
#include "mservice/ussd.hpp"

namespace mservice {

namespace {

constexpr std::string_view kQuestionAck = "Swali lako limepokelewa. Daktari atakujibu kwa SMS hivi karibuni.";
constexpr std::string_view kUnsubscribed = "Umejiondoa kwenye huduma ya M-Afya ya Mama. Asante.";

std::string first_word(std::string_view text) {
  auto t = text::trim(text);
  auto sp = t.find_first_of(" \t\r\n");
  return text::upper_ascii(t.substr(0, sp));
}

std::string wire_error_text(ErrorCode code, const Config& config) {
  switch (code) {
    case ErrorCode::SessionAlreadyOpen: return "Una kikao kingine kilicho wazi. Tafadhali subiri kidogo.";
    case ErrorCode::UnknownSession: return "Kikao kimekwisha. Piga *" + config.service_code + "# upya.";
    case ErrorCode::WrongServiceCode:
    case ErrorCode::MalformedCode: return "Namba ya huduma si sahihi. Piga *" + config.service_code + "#.";
    case ErrorCode::MalformedMsisdn: return "Namba ya simu si sahihi.";
    default: return "Samahani, kuna hitilafu. Jaribu tena baadaye.";
  }
}

}  // namespace

GatewaySim::GatewaySim(Store& store, Registry& registry, SessionEngine& sessions, AdLedger& ledger,
                       ContentCatalog& catalog, SmsOutbox& outbox, const Config& config, const Clock& clock)
    : store_(store),
      registry_(registry),
      sessions_(sessions),
      ledger_(ledger),
      catalog_(catalog),
      outbox_(outbox),
      config_(config),
      clock_(clock) {}

std::string GatewaySim::welcome_message() const {
  return "Karibu M-Afya ya Mama! Piga *" + config_.service_code +
         "# kupata taarifa za afya ya mama na mtoto. Tuma " + config_.unsubscribe_keyword + " kwenda " +
         config_.registration_shortcode + " kujiondoa.";
}

SmsResult GatewaySim::route_registration(const Msisdn& from, std::string_view body) {
  auto word = first_word(body);
  if (word == text::upper_ascii(config_.registration_keyword)) {
    try {
      registry_.register_subscriber(from, true);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AlreadyRegistered) throw;
      return {SmsRoute::Registration, "already_registered"};
    }
    outbox_.send_sms(from, welcome_message(), SmsKind::System);
    return {SmsRoute::Registration, "registered"};
  }
  if (word == text::upper_ascii(config_.unsubscribe_keyword)) {
    try {
      registry_.unsubscribe(from);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotSubscribed) throw;
      return {SmsRoute::Registration, "not_subscribed"};
    }
    outbox_.send_sms(from, kUnsubscribed, SmsKind::System);
    return {SmsRoute::Registration, "unsubscribed"};
  }
  // a confirmation code typed back by SMS instead of dialled
  auto trimmed = text::trim(body);
  if (trimmed.size() == 6 && text::all_digits(trimmed)) {
    try {
      store_.transact([&] {
        auto pc = ledger_.redeem_confirmation(from, trimmed);
        catalog_.deliver_content(ContentRequest{from, pc.category, RequestOrigin::Sponsored, pc.id.value});
      });
      return {SmsRoute::ConfirmationCode, "delivered"};
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::UnknownCode:
        case ErrorCode::WrongMsisdn:
        case ErrorCode::ExpiredCode:
        case ErrorCode::NotAuthorized:
        case ErrorCode::EmptyCategory:
          return {SmsRoute::ConfirmationCode, std::string(to_string(e.code()))};
        default: throw;
      }
    }
  }
  return {SmsRoute::Unrecognized, "unknown_keyword"};
}

SmsResult GatewaySim::route_question(const Msisdn& from, std::string_view body) {
  try {
    auto q = catalog_.submit_question(from, body);
    outbox_.send_sms(from, kQuestionAck, SmsKind::System, Correlation{Correlation::Kind::Question, q.id.value});
    return {SmsRoute::Question, "question:" + std::to_string(q.id.value)};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotSubscribed && e.code() != ErrorCode::EmptyText) throw;
    return {SmsRoute::Unrecognized, std::string(to_string(e.code()))};
  }
}

SmsResult GatewaySim::receive_sms(std::string_view from, std::string_view shortcode, std::string_view body) {
  SmsResult result;
  auto code = std::string(text::trim(shortcode));
  try {
    auto sender = Msisdn::parse(from);
    if (code == config_.registration_shortcode) {
      result = route_registration(sender, body);
    } else if (code == config_.question_shortcode) {
      result = route_question(sender, body);
    } else {
      result = {SmsRoute::Unrecognized, "unknown_shortcode"};
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MalformedMsisdn) throw;
    result = {SmsRoute::Unrecognized, "MalformedMsisdn"};
  }
  store_.append_received_sms(
      ReceivedSms{ReceivedSmsId{}, std::string(from), code, std::string(body), clock_.now(), result.routed_as,
                  result.outcome});
  return result;
}

UssdWireReply GatewaySim::ussd_request(std::string_view msisdn, std::string_view session_id, std::string_view body) {
  try {
    auto caller = Msisdn::parse(msisdn);
    if (session_id.empty()) return {sessions_.begin_session(caller, parse_ussd_code(body)), std::nullopt};
    auto sid = std::string(session_id);
    auto s = sessions_.session(sid);
    if (!s || s->msisdn != caller) throw Error(ErrorCode::UnknownSession, sid);
    return {sessions_.handle_input(sid, body), std::nullopt};
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::MalformedMsisdn:
      case ErrorCode::MalformedCode:
      case ErrorCode::WrongServiceCode:
      case ErrorCode::SessionAlreadyOpen:
      case ErrorCode::UnknownSession:
        return {UssdReply{wire_error_text(e.code(), config_), Disposition::End, std::string(session_id)}, e.code()};
      default: throw;
    }
  }
}

HttpResponse GatewaySim::sim_ussd(const HttpRequest& req) {
  auto body = parse_body(req);
  auto field = [&](const char* name, bool required) -> std::string {
    if (!body.contains(name) || body[name].is_null()) {
      if (required) throw Error(ErrorCode::BadRequest, std::string(name) + " is required");
      return {};
    }
    if (!body[name].is_string()) throw Error(ErrorCode::BadRequest, std::string(name) + " must be a string");
    return body[name].get<std::string>();
  };
  auto msisdn = field("msisdn", true);
  auto session = field("session", false);
  auto input = field("text", true);
  auto r = ussd_request(msisdn, session, input);
  Json out;
  out["reply"] = r.reply.text;
  out["continue"] = r.reply.disposition == Disposition::Continue;
  out["session"] = r.reply.session_id;
  if (r.error) out["error"] = std::string(to_string(*r.error));
  return json_response(200, out);
}

HttpResponse GatewaySim::sim_sms(const HttpRequest& req) {
  auto body = parse_body(req);
  for (const char* name : {"msisdn", "shortcode", "text"})
    if (!body.contains(name) || !body[name].is_string())
      throw Error(ErrorCode::BadRequest, std::string(name) + " must be a string");
  auto r = receive_sms(body["msisdn"].get<std::string>(), body["shortcode"].get<std::string>(),
                       body["text"].get<std::string>());
  Json out;
  out["status"] = "ok";
  out["routed_as"] = std::string(to_string(r.routed_as));
  out["outcome"] = r.outcome;
  return json_response(200, out);
}

std::optional<HttpResponse> GatewaySim::handle(const HttpRequest& req) {
  auto seg = path_segments(req.path);
  if (seg.empty()) return std::nullopt;
  try {
    if (seg.size() == 1 && seg[0] == "health") {
      if (req.method != "GET") return error_response(405, "MethodNotAllowed", req.method);
      Json out;
      out["status"] = "ok";
      out["time"] = to_iso8601(clock_.now());
      return json_response(200, out);
    }
    if (seg[0] != "sim") return std::nullopt;
    auto expect = [&](const char* method) {
      if (req.method != method) throw Error(ErrorCode::MethodNotAllowed, req.method + " " + req.path);
    };
    if (seg.size() == 2 && seg[1] == "ussd") {
      expect("POST");
      return sim_ussd(req);
    }
    if (seg.size() == 2 && seg[1] == "sms") {
      expect("POST");
      return sim_sms(req);
    }
    if (seg.size() == 3 && seg[1] == "inbox") {
      expect("GET");
      auto who = Msisdn::parse(seg[2]);
      Json msgs = Json::array();
      for (const auto& d : outbox_.inbox(who)) msgs.push_back(to_json(d));
      Json out;
      out["msisdn"] = who.value();
      out["messages"] = msgs;
      return json_response(200, out);
    }
    if (seg.size() == 2 && seg[1] == "deliveries") {
      expect("GET");
      auto period = period_from_query(req);
      auto out = to_json(outbox_.cost_report(period));
      Json list = Json::array();
      std::optional<Msisdn> who;
      if (auto m = req.param("msisdn"); m && !m->empty()) who = Msisdn::parse(*m);
      for (const auto& d : store_.list_deliveries(who, period)) list.push_back(to_json(d));
      out["deliveries"] = list;
      return json_response(200, out);
    }
    return error_response(404, "NotFound", req.path);
  } catch (const Error& e) {
    return error_response(e);
  }
}

}  // namespace mservice

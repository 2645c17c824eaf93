#include "mservice/http_types.hpp"

namespace mservice {

std::optional<std::string> HttpRequest::header(const std::string& lower_name) const {
  auto it = headers.find(lower_name);
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> HttpRequest::param(const std::string& name) const {
  auto it = query.find(name);
  if (it == query.end()) return std::nullopt;
  return it->second;
}

HttpResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, std::string_view error, std::string_view detail) {
  Json body;
  body["error"] = std::string(error);
  body["detail"] = std::string(detail);
  return json_response(status, body);
}

HttpResponse error_response(const Error& e) { return error_response(http_status(e.code()), to_string(e.code()), e.detail()); }

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadRequest:
    case ErrorCode::MalformedMsisdn:
    case ErrorCode::MalformedCode:
    case ErrorCode::NegativeAmount:
    case ErrorCode::InvalidInput:
      return 400;
    case ErrorCode::BadCredentials:
    case ErrorCode::Unauthorized:
      return 401;
    case ErrorCode::Forbidden:
    case ErrorCode::NotADoctor:
      return 403;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownCategory:
    case ErrorCode::UnknownUser:
    case ErrorCode::UnknownUserGroup:
    case ErrorCode::UnknownAd:
    case ErrorCode::UnknownContent:
    case ErrorCode::UnknownSponsor:
    case ErrorCode::UnknownQuestion:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownCode:
      return 404;
    case ErrorCode::MethodNotAllowed:
      return 405;
    case ErrorCode::StorageFailure:
      return 500;
    default:
      return 422;
  }
}

Json parse_body(const HttpRequest& req) {
  Json body;
  try {
    body = Json::parse(req.body.empty() ? std::string("{}") : req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, std::string("invalid JSON: ") + e.what());
  }
  if (!body.is_object()) throw Error(ErrorCode::BadRequest, "body must be a JSON object");
  return body;
}

std::vector<std::string> path_segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = path.find('/', i);
    if (j == std::string_view::npos) j = path.size();
    if (j > i) out.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return out;
}

Period period_from_query(const HttpRequest& req) {
  Period p;
  auto bound = [&](const char* name) -> std::optional<Timestamp> {
    auto raw = req.param(name);
    if (!raw || raw->empty()) return std::nullopt;
    auto t = parse_timestamp(*raw);
    if (!t) throw Error(ErrorCode::BadRequest, std::string(name) + ": expected unix seconds or ISO-8601 UTC");
    return t;
  };
  p.from = bound("from");
  p.to = bound("to");
  return p;
}

Json to_json(const DeliveryRecord& d) {
  Json j;
  j["id"] = d.id.value;
  j["msisdn"] = d.msisdn.value();
  j["kind"] = std::string(to_string(d.kind));
  j["body"] = d.body;
  j["segments"] = d.segments;
  j["cost"] = d.cost.tsh();
  j["at"] = to_iso8601(d.at);
  j["charset_warning"] = d.charset_warning;
  return j;
}

Json to_json(const CostReport& r) {
  Json j;
  j["total_sms"] = r.total_sms;
  j["total_segments"] = r.total_segments;
  j["total_cost"] = r.total_cost.tsh();
  Json kinds = Json::object();
  for (const auto& [kind, t] : r.by_kind) {
    Json k;
    k["sms"] = t.sms;
    k["segments"] = t.segments;
    k["cost"] = t.cost.tsh();
    kinds[std::string(to_string(kind))] = k;
  }
  j["by_kind"] = kinds;
  return j;
}

}  // namespace mservice

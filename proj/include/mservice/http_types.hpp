#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "mservice/domain.hpp"
#include "mservice/error.hpp"
#include "mservice/sms.hpp"

namespace mservice {

using Json = nlohmann::ordered_json;

/// Transport-independent request. Header names are lower-case.
struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;

  [[nodiscard]] std::optional<std::string> header(const std::string& lower_name) const;
  [[nodiscard]] std::optional<std::string> param(const std::string& name) const;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  [[nodiscard]] Json json() const { return Json::parse(body); }
};

HttpResponse json_response(int status, const Json& body);
HttpResponse error_response(int status, std::string_view error, std::string_view detail = {});
HttpResponse error_response(const Error& e);

/// Status code an Error maps to on the wire.
int http_status(ErrorCode code) noexcept;

/// Parses the request body as a JSON object. Throws Error(BadRequest).
Json parse_body(const HttpRequest& req);

/// Splits "/a/b/c" into {"a","b","c"}.
std::vector<std::string> path_segments(std::string_view path);

/// Period from optional "from"/"to" query parameters. Throws Error(BadRequest).
Period period_from_query(const HttpRequest& req);

// Wire forms of domain values.
Json to_json(const DeliveryRecord& d);
Json to_json(const CostReport& r);

}  // namespace mservice

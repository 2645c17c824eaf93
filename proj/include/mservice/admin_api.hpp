#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mservice/ad_ledger.hpp"
#include "mservice/content_catalog.hpp"
#include "mservice/http_types.hpp"
#include "mservice/registry.hpp"
#include "mservice/sms.hpp"

namespace mservice {

/// One row of the endpoint permission table. A caller is admitted when its
/// group holds any of `any_of`; an empty list means the route is public.
struct RouteSpec {
  std::string_view method;
  std::string_view pattern;  // "/sponsors/{id}/deposit", relative to /api/v1
  std::vector<Permission> any_of;
  bool mutation = false;
};

/// Staff-facing JSON API under /api/v1. Bearer-token auth, permission tags
/// from the caller's user group, audit rows for every successful mutation.
class AdminApi {
 public:
  AdminApi(Store& store, Registry& registry, AdLedger& ledger, ContentCatalog& catalog, SmsOutbox& outbox,
           const Config& config, const Clock& clock);

  static constexpr std::string_view kPrefix = "/api/v1";

  /// Every route this API serves.
  static const std::vector<RouteSpec>& routes();

  /// Handles /api/v1/*; nullopt for any other path.
  std::optional<HttpResponse> handle(const HttpRequest& req);

  /// Issues a token. BadCredentials for unknown users and wrong passwords
  /// alike; the password check runs either way.
  AuthToken login(std::string_view username, std::string_view password);

  /// Throws Unauthorized for unknown or expired tokens.
  User authenticate(std::string_view token) const;

  std::size_t purge_expired_tokens(Timestamp now);

  /// Re-applies recorded mutations in order, as their original actors,
  /// without the auth layer. Intended for a fresh store seeded with the
  /// same fixture. Returns the number applied; throws on the first failure.
  std::size_t replay(const std::vector<AuditEntry>& log);

  Json dashboard() const;

 private:
  struct Call {
    const HttpRequest& req;
    const RouteSpec& route;
    std::vector<std::string> seg;
    std::optional<User> actor;
    bool replaying = false;
  };
  struct Outcome {
    int status = 200;
    Json body;
    std::string entity;
    std::string action;
    std::optional<std::int64_t> target;
    std::string summary;
  };

  HttpResponse dispatch(const HttpRequest& req, const RouteSpec& route, std::vector<std::string> seg,
                        std::optional<User> actor, bool replaying);
  static Outcome query_result(Json body);
  Outcome run(const Call& call);

  Store& store_;
  Registry& registry_;
  AdLedger& ledger_;
  ContentCatalog& catalog_;
  SmsOutbox& outbox_;
  const Config& config_;
  const Clock& clock_;
  std::once_flag dummy_once_;
  std::string dummy_hash_;
};

}  // namespace mservice

#pragma once

#include <memory>

#include "mservice/ad_ledger.hpp"
#include "mservice/admin_api.hpp"
#include "mservice/clock.hpp"
#include "mservice/config.hpp"
#include "mservice/content_catalog.hpp"
#include "mservice/gateway.hpp"
#include "mservice/http_types.hpp"
#include "mservice/registry.hpp"
#include "mservice/session_engine.hpp"
#include "mservice/sms.hpp"
#include "mservice/store.hpp"

namespace mservice {

struct SweepCounts {
  std::size_t sessions = 0;
  std::size_t confirmations = 0;
  std::size_t tokens = 0;
};

/// Owns one store and every engine built on it, wired together, and routes
/// HTTP requests to the simulator or the admin API.
class Service {
 public:
  /// A null clock means wall time. The seed comes from config.seed, or a
  /// fresh one when unset.
  explicit Service(Config config, std::shared_ptr<const Clock> clock = nullptr);

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(const HttpRequest& req);

  /// Expires stale sessions, overdue confirmations and old tokens.
  SweepCounts sweep();

  [[nodiscard]] const Config& config() const noexcept { return config_; }
  [[nodiscard]] const Clock& clock() const noexcept { return *clock_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  Store& store() noexcept { return store_; }
  Registry& registry() noexcept { return registry_; }
  SmsOutbox& outbox() noexcept { return outbox_; }
  AdLedger& ledger() noexcept { return ledger_; }
  ContentCatalog& catalog() noexcept { return catalog_; }
  SessionEngine& sessions() noexcept { return sessions_; }
  GatewaySim& gateway() noexcept { return gateway_; }
  AdminApi& admin() noexcept { return admin_; }

 private:
  Config config_;
  std::shared_ptr<const Clock> clock_;
  std::uint64_t seed_;
  Store store_;
  Registry registry_;
  SmsOutbox outbox_;
  AdLedger ledger_;
  ContentCatalog catalog_;
  SessionEngine sessions_;
  GatewaySim gateway_;
  AdminApi admin_;
};

}  // namespace mservice

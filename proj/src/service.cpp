#include "mservice/service.hpp"

#include "mservice/crypto.hpp"

namespace mservice {

Service::Service(Config config, std::shared_ptr<const Clock> clock)
    : config_(std::move(config)),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      seed_(config_.seed ? *config_.seed : fresh_seed()),
      store_(config_.storage_path),
      registry_(store_, config_, *clock_),
      outbox_(store_, config_, *clock_),
      ledger_(store_, registry_, outbox_, config_, *clock_, seed_),
      catalog_(store_, registry_, outbox_, config_, *clock_, seed_),
      sessions_(registry_, ledger_, catalog_, config_, *clock_, seed_),
      gateway_(store_, registry_, sessions_, ledger_, catalog_, outbox_, config_, *clock_),
      admin_(store_, registry_, ledger_, catalog_, outbox_, config_, *clock_) {}

HttpResponse Service::handle(const HttpRequest& req) {
  try {
    if (auto r = gateway_.handle(req)) return *r;
    if (auto r = admin_.handle(req)) return *r;
    return error_response(404, "NotFound", req.path);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(500, "InternalError", e.what());
  }
}

SweepCounts Service::sweep() {
  auto now = clock_->now();
  SweepCounts c;
  c.sessions = sessions_.expire_sessions(now);
  c.confirmations = ledger_.expire_confirmations(now);
  c.tokens = admin_.purge_expired_tokens(now);
  return c;
}

}  // namespace mservice

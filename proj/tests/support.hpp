#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <algorithm>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mservice/admin_api.hpp"

#include "mservice/clock.hpp"
#include "mservice/service.hpp"

namespace mservice::testkit {

inline constexpr std::int64_t kStart = 1767254400;  // 2026-01-01T08:00:00Z

inline Config test_config() {
  Config c;
  c.storage_path = ":memory:";
  c.pwhash_profile = PwhashProfile::Minimal;
  c.seed = 42;
  return c;
}

/// A Service on a manual clock plus shortcuts for building store state.
struct Harness {
  explicit Harness(Config config = test_config())
      : clock(std::make_shared<ManualClock>(from_unix(kStart))), svc(std::move(config), clock) {}

  std::shared_ptr<ManualClock> clock;
  Service svc;

  Msisdn subscribe(const std::string& number, bool consent = true) {
    auto m = Msisdn::parse(number);
    svc.registry().register_subscriber(m, consent);
    return m;
  }

  UserGroup group(const std::string& name, std::set<Permission> perms) {
    return svc.registry().create_user_group(name, std::move(perms));
  }

  User doctor() {
    if (!doctor_) {
      auto g = group("Doctor", {Permission::Medical, Permission::Content, Permission::QuestionsRead,
                                Permission::AnswersCreate});
      doctor_ = svc.registry().create_user("dkt", "doctor-pass", g.id, "Daktari");
    }
    return *doctor_;
  }

  User admin() {
    if (!admin_) {
      auto g = group("Administrator", {Permission::Users, Permission::UserGroups, Permission::Sponsors,
                                       Permission::Ads, Permission::Categories, Permission::Reports,
                                       Permission::Subscribers});
      admin_ = svc.registry().create_user("admin", "admin-pass", g.id, "Admin");
    }
    return *admin_;
  }

  Category category(std::optional<CategoryId> parent, const std::string& name, int position) {
    return svc.registry().create_category(parent, name, position);
  }

  /// A leaf with `items` content bodies, under an optional parent.
  Category leaf(std::optional<CategoryId> parent, const std::string& name, int position,
                const std::vector<std::string>& items = {"Maelezo ya afya"}) {
    auto c = category(parent, name, position);
    for (const auto& body : items) svc.catalog().add_content(doctor(), c.id, body);
    return c;
  }

  /// Sponsor with an opening deposit and `ads` ads.
  Sponsor sponsor(const std::string& name, std::int64_t balance, int ads = 1) {
    auto s = svc.registry().create_sponsor(name, name + "@example.tz");
    if (balance > 0) svc.ledger().deposit(s.id, Money{balance});
    for (int i = 0; i < ads; ++i) svc.registry().create_ad(s.id, name + " tangazo " + std::to_string(i + 1));
    return svc.registry().sponsor(s.id);
  }

  Money balance(SponsorId id) { return svc.registry().sponsor(id).balance; }

  std::size_t impressions(SponsorId id) {
    std::size_t n = 0;
    for (const auto& e : svc.store().list_ledger(id)) n += e.kind == LedgerKind::ImpressionCharge;
    return n;
  }

  void advance(std::int64_t seconds) { clock->advance(std::chrono::seconds(seconds)); }

 private:
  std::optional<User> doctor_;
  std::optional<User> admin_;
};

/// Last confirmation code sent to a handset in an Ad SMS.
inline std::string last_code(Service& svc, const Msisdn& m) {
  std::string code;
  for (const auto& d : svc.outbox().inbox(m)) {
    if (d.kind != SmsKind::Ad) continue;
    auto star = d.body.rfind('*');
    code = d.body.substr(star + 1, 6);
  }
  return code;
}

/// Content SMS records without a Redeemed confirmation for the same
/// handset. Paid deliveries are correlated to payment intents and are
/// skipped.
inline std::size_t gating_violations(Store& store) {
  std::size_t bad = 0;
  for (const auto& d : store.list_deliveries()) {
    if (d.kind != SmsKind::Content) continue;
    if (!d.correlation) {
      ++bad;
      continue;
    }
    if (d.correlation->kind != Correlation::Kind::Confirmation) continue;
    auto pc = store.find_confirmation(ConfirmationId(d.correlation->id));
    if (!pc || pc->state != ConfirmationState::Redeemed || pc->msisdn != d.msisdn) ++bad;
  }
  return bad;
}


inline constexpr Permission kAllPermissions[] = {
    Permission::Users,   Permission::UserGroups,    Permission::Sponsors,      Permission::Ads,
    Permission::Categories, Permission::Content,    Permission::QuestionsRead, Permission::AnswersCreate,
    Permission::Reports, Permission::Subscribers,   Permission::Medical};

/// Concrete path for a route pattern, with ids that match no row so that
/// admitted requests fail as NotFound or BadRequest and leave state alone.
inline std::string concrete_path(std::string_view pattern) {
  std::string out(AdminApi::kPrefix);
  std::string p(pattern);
  for (auto pos = p.find("{id}"); pos != std::string::npos; pos = p.find("{id}")) p.replace(pos, 4, "999999");
  return out + p;
}

struct MatrixMismatch {
  std::string route;
  std::string permission;  // comma-joined tags, or "<none>" / "<forged>"
  int status;
};

/// Calls every admin route anonymously, with a forged token, as a holder
/// of each single permission and as members of `random_groups` groups with
/// random permission sets. A caller must be refused (401 or 403) exactly
/// when the route's table entry does not admit any of its permissions.
inline std::vector<MatrixMismatch> authorization_matrix(Harness& h, int random_groups = 24) {
  std::vector<MatrixMismatch> bad;
  std::vector<std::pair<std::set<Permission>, std::string>> tokens;
  auto enrol = [&](const std::string& name, std::set<Permission> perms) {
    auto g = h.group("g-" + name, perms);
    h.svc.registry().create_user("u-" + name, "pw-" + name, g.id, name);
    tokens.emplace_back(std::move(perms), h.svc.admin().login("u-" + name, "pw-" + name).token);
  };
  for (auto p : kAllPermissions) enrol(std::string(to_string(p)), {p});
  std::mt19937_64 rng(404);
  for (int i = 0; i < random_groups; ++i) {
    std::set<Permission> perms;
    for (auto p : kAllPermissions)
      if (rng() % 3 == 0) perms.insert(p);
    if (perms.empty()) perms.insert(kAllPermissions[rng() % std::size(kAllPermissions)]);
    enrol("random-" + std::to_string(i), perms);
  }
  for (const auto& r : AdminApi::routes()) {
    auto label = std::string(r.method) + " " + std::string(r.pattern);
    HttpRequest req{std::string(r.method), concrete_path(r.pattern), {}, {}, r.method == "GET" ? "" : "{}"};
    bool open = r.any_of.empty();
    auto anon = h.svc.handle(req);
    if ((anon.status == 401) == open) bad.push_back({label, "<none>", anon.status});
    auto forged_req = req;
    forged_req.headers["authorization"] = "Bearer not-a-real-token";
    auto forged = h.svc.handle(forged_req);
    if ((forged.status == 401) == open) bad.push_back({label, "<forged>", forged.status});
    for (const auto& [perms, token] : tokens) {
      auto authed = req;
      authed.headers["authorization"] = "Bearer " + token;
      auto resp = h.svc.handle(authed);
      bool admitted = open || std::any_of(r.any_of.begin(), r.any_of.end(), [&](Permission p) { return perms.count(p); });
      bool refused = resp.status == 401 || resp.status == 403;
      if (admitted == refused) {
        std::string names;
        for (auto p : perms) names += (names.empty() ? "" : ",") + std::string(to_string(p));
        bad.push_back({label, names, resp.status});
      }
    }
  }
  return bad;
}

}  // namespace mservice::testkit

#include "mservice/admin_api.hpp"

#include <algorithm>

#include "mservice/crypto.hpp"
#include "mservice/text.hpp"

namespace mservice {

namespace {

using P = Permission;

Json user_json(const User& u, const Store& store) {
  Json j;
  j["id"] = u.id.value;
  j["username"] = u.username;
  j["display_name"] = u.display_name;
  j["group"] = u.group.value;
  Json perms = Json::array();
  if (auto g = store.find_user_group(u.group))
    for (auto p : g->permissions) perms.push_back(std::string(to_string(p)));
  j["permissions"] = perms;
  return j;
}

Json group_json(const UserGroup& g) {
  Json perms = Json::array();
  for (auto p : g.permissions) perms.push_back(std::string(to_string(p)));
  Json j;
  j["id"] = g.id.value;
  j["name"] = g.name;
  j["permissions"] = perms;
  return j;
}

Json sponsor_json(const Sponsor& s) {
  Json j;
  j["id"] = s.id.value;
  j["name"] = s.name;
  j["contact"] = s.contact;
  j["balance"] = s.balance.tsh();
  j["active"] = s.active;
  return j;
}

Json ad_json(const Ad& a) {
  Json j;
  j["id"] = a.id.value;
  j["sponsor"] = a.sponsor.value;
  j["body_sw"] = a.body_sw;
  j["active"] = a.active;
  j["created_at"] = to_iso8601(a.created_at);
  return j;
}

Json category_json(const Category& c, const Registry& registry) {
  Json j;
  j["id"] = c.id.value;
  j["parent"] = c.parent ? Json(c.parent->value) : Json(nullptr);
  j["name_sw"] = c.name_sw;
  j["position"] = c.position;
  j["active"] = c.active;
  j["leaf"] = registry.is_leaf(c.id);
  return j;
}

Json content_json(const ContentItem& c) {
  Json j;
  j["id"] = c.id.value;
  j["category"] = c.category.value;
  j["body_sw"] = c.body_sw;
  j["author"] = c.author.value;
  j["created_at"] = to_iso8601(c.created_at);
  j["active"] = c.active;
  j["segments"] = segment_message(c.body_sw).size();
  return j;
}

Json answer_json(const Answer& a) {
  Json j;
  j["id"] = a.id.value;
  j["question"] = a.question.value;
  j["doctor"] = a.doctor.value;
  j["text"] = a.text;
  j["answered_at"] = to_iso8601(a.answered_at);
  return j;
}

Json question_json(const Question& q, const Store& store) {
  Json j;
  j["id"] = q.id.value;
  j["subscriber"] = q.subscriber.value;
  auto sub = store.find_subscriber(q.subscriber);
  j["msisdn"] = sub ? sub->msisdn.value() : std::string();
  j["text"] = q.text;
  j["received_at"] = to_iso8601(q.received_at);
  j["status"] = std::string(to_string(q.status));
  return j;
}

Json subscriber_json(const Subscriber& s) {
  Json j;
  j["id"] = s.id.value;
  j["msisdn"] = s.msisdn.value();
  j["registered_at"] = to_iso8601(s.registered_at);
  j["status"] = std::string(to_string(s.status));
  j["consent_ads"] = s.consent_ads;
  return j;
}

Json impression_json(const ImpressionRow& r) {
  Json j;
  j["sponsor"] = r.sponsor.value;
  j["name"] = r.name;
  j["impressions"] = r.impressions;
  j["spend"] = r.spend.tsh();
  j["deposits"] = r.deposits.tsh();
  j["remaining"] = r.remaining.tsh();
  return j;
}

// Body field readers. Wrong JSON types are a BadRequest; domain checks
// happen further down in the registry.
bool has(const Json& b, const char* k) { return b.contains(k); }

std::optional<std::string> opt_string(const Json& b, const char* k) {
  if (!has(b, k)) return std::nullopt;
  if (!b[k].is_string()) throw Error(ErrorCode::BadRequest, std::string(k) + " must be a string");
  return b[k].get<std::string>();
}

std::string req_string(const Json& b, const char* k) {
  auto v = opt_string(b, k);
  if (!v) throw Error(ErrorCode::BadRequest, std::string(k) + " is required");
  return *v;
}

std::optional<std::int64_t> opt_int(const Json& b, const char* k) {
  if (!has(b, k)) return std::nullopt;
  if (!b[k].is_number_integer()) throw Error(ErrorCode::BadRequest, std::string(k) + " must be an integer");
  return b[k].get<std::int64_t>();
}

std::int64_t req_int(const Json& b, const char* k) {
  auto v = opt_int(b, k);
  if (!v) throw Error(ErrorCode::BadRequest, std::string(k) + " is required");
  return *v;
}

std::optional<bool> opt_bool(const Json& b, const char* k) {
  if (!has(b, k)) return std::nullopt;
  if (!b[k].is_boolean()) throw Error(ErrorCode::BadRequest, std::string(k) + " must be a boolean");
  return b[k].get<bool>();
}

std::set<Permission> permissions_from(const Json& b, const char* k) {
  if (!b[k].is_array()) throw Error(ErrorCode::BadRequest, std::string(k) + " must be an array of strings");
  std::set<Permission> out;
  for (const auto& v : b[k]) {
    if (!v.is_string()) throw Error(ErrorCode::BadRequest, std::string(k) + " must be an array of strings");
    auto p = permission_from_string(v.get<std::string>());
    if (!p) throw Error(ErrorCode::ValidationFailed, "unknown permission '" + v.get<std::string>() + "'");
    out.insert(*p);
  }
  return out;
}

std::int64_t id_segment(const std::string& s) {
  if (!text::all_digits(s) || s.empty() || s.size() > 18) throw Error(ErrorCode::NotFound, s);
  return std::stoll(s);
}

std::string changed_fields(const Json& body) {
  std::string out;
  for (auto it = body.begin(); it != body.end(); ++it) {
    if (!out.empty()) out += ", ";
    out += it.key();
  }
  return out;
}

bool pattern_matches(std::string_view pattern, const std::vector<std::string>& seg) {
  auto parts = path_segments(pattern);
  if (parts.size() != seg.size()) return false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] == "{id}") {
      if (seg[i].empty() || !text::all_digits(seg[i])) return false;
    } else if (parts[i] != seg[i]) {
      return false;
    }
  }
  return true;
}

}  // namespace

const std::vector<RouteSpec>& AdminApi::routes() {
  static const std::vector<RouteSpec> table = [] {
    std::vector<RouteSpec> t;
    t.push_back({"POST", "/auth/login", {}, false});
    auto crud = [&](std::string_view list, std::string_view one, std::vector<Permission> read,
                    std::vector<Permission> write) {
      t.push_back({"GET", list, read, false});
      t.push_back({"POST", list, write, true});
      t.push_back({"GET", one, read, false});
      t.push_back({"PATCH", one, write, true});
      t.push_back({"DELETE", one, write, true});
    };
    crud("/users", "/users/{id}", {P::Users}, {P::Users});
    crud("/user-groups", "/user-groups/{id}", {P::UserGroups}, {P::UserGroups});
    crud("/sponsors", "/sponsors/{id}", {P::Sponsors}, {P::Sponsors});
    t.push_back({"POST", "/sponsors/{id}/deposit", {P::Sponsors}, true});
    crud("/ads", "/ads/{id}", {P::Ads}, {P::Ads});
    // content authors need to see the tree they file content under
    crud("/categories", "/categories/{id}", {P::Categories, P::Content}, {P::Categories});
    crud("/content", "/content/{id}", {P::Content}, {P::Content});
    t.push_back({"GET", "/questions", {P::QuestionsRead}, false});
    t.push_back({"GET", "/questions/{id}", {P::QuestionsRead}, false});
    t.push_back({"POST", "/questions/{id}/answer", {P::AnswersCreate}, true});
    t.push_back({"GET", "/subscribers", {P::Subscribers}, false});
    t.push_back({"GET", "/reports/dashboard", {P::Reports}, false});
    t.push_back({"GET", "/reports/impressions", {P::Reports}, false});
    t.push_back({"GET", "/reports/sms-costs", {P::Reports}, false});
    return t;
  }();
  return table;
}

AdminApi::AdminApi(Store& store, Registry& registry, AdLedger& ledger, ContentCatalog& catalog, SmsOutbox& outbox,
                   const Config& config, const Clock& clock)
    : store_(store),
      registry_(registry),
      ledger_(ledger),
      catalog_(catalog),
      outbox_(outbox),
      config_(config),
      clock_(clock) {}

AuthToken AdminApi::login(std::string_view username, std::string_view password) {
  std::call_once(dummy_once_, [&] { dummy_hash_ = hash_password(random_token(16), config_.pwhash_profile); });
  auto user = store_.find_user_by_username(std::string(username));
  bool ok = verify_password(user ? user->password_hash : dummy_hash_, password);
  if (!user || !ok) throw Error(ErrorCode::BadCredentials, "invalid username or password");
  auto now = clock_.now();
  AuthToken t{random_token(), user->id, now, now + config_.token_ttl};
  store_.insert_token(t);
  return t;
}

User AdminApi::authenticate(std::string_view token) const {
  auto t = store_.find_token(std::string(token));
  if (!t) throw Error(ErrorCode::Unauthorized, "unknown token");
  if (clock_.now() >= t->expires_at) throw Error(ErrorCode::Unauthorized, "token expired");
  auto u = store_.find_user(t->user);
  if (!u) throw Error(ErrorCode::Unauthorized, "token owner no longer exists");
  return *u;
}

std::size_t AdminApi::purge_expired_tokens(Timestamp now) { return store_.delete_tokens_expired_by(now); }

std::optional<HttpResponse> AdminApi::handle(const HttpRequest& req) {
  std::string_view path = req.path;
  if (path.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  auto rest = path.substr(kPrefix.size());
  if (!rest.empty() && rest.front() != '/') return std::nullopt;
  auto seg = path_segments(rest);

  const RouteSpec* route = nullptr;
  bool path_known = false;
  for (const auto& r : routes()) {
    if (!pattern_matches(r.pattern, seg)) continue;
    path_known = true;
    if (r.method == req.method) {
      route = &r;
      break;
    }
  }
  if (!route) {
    if (path_known) return error_response(405, "MethodNotAllowed", req.method + " " + req.path);
    return error_response(404, "NotFound", req.path);
  }

  std::optional<User> actor;
  try {
    if (!route->any_of.empty()) {
      auto auth = req.header("authorization");
      constexpr std::string_view kBearer = "Bearer ";
      if (!auth || auth->size() <= kBearer.size() || std::string_view(*auth).substr(0, kBearer.size()) != kBearer)
        throw Error(ErrorCode::Unauthorized, "missing bearer token");
      actor = authenticate(std::string_view(*auth).substr(kBearer.size()));
      bool allowed = std::any_of(route->any_of.begin(), route->any_of.end(),
                                 [&](Permission p) { return registry_.has_permission(*actor, p); });
      if (!allowed) throw Error(ErrorCode::Forbidden, std::string(route->method) + " " + std::string(route->pattern));
    }
  } catch (const Error& e) {
    return error_response(e);
  }
  return dispatch(req, *route, std::move(seg), std::move(actor), false);
}

HttpResponse AdminApi::dispatch(const HttpRequest& req, const RouteSpec& route, std::vector<std::string> seg,
                                std::optional<User> actor, bool replaying) {
  Call call{req, route, std::move(seg), std::move(actor), replaying};
  try {
    if (!route.mutation) {
      auto out = run(call);
      return json_response(out.status, out.body);
    }
    auto out = store_.transact([&] {
      auto o = run(call);
      AuditEntry a{AuditId{},
                   call.actor ? std::optional<UserId>(call.actor->id) : std::nullopt,
                   clock_.now(),
                   req.method,
                   req.path,
                   o.entity,
                   o.action,
                   o.target,
                   o.summary,
                   {}};
      auto payload = req.method == "DELETE" ? Json::object() : parse_body(req);
      // users keep their hash so a replay reproduces the same credentials
      bool credentials = payload.contains("password") || payload.contains("password_hash");
      payload.erase("password");
      if (o.entity == "user" && o.target && credentials)
        if (auto u = store_.find_user(UserId(*o.target))) payload["password_hash"] = u->password_hash;
      a.payload = payload.dump();
      store_.append_audit(a);
      return o;
    });
    return json_response(out.status, out.body);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, "BadRequest", e.what());
  }
}

AdminApi::Outcome AdminApi::query_result(Json body) {
  Outcome o;
  o.body = std::move(body);
  return o;
}

AdminApi::Outcome AdminApi::run(const Call& call) {
  const auto& req = call.req;
  const auto& seg = call.seg;
  const std::string_view pattern = call.route.pattern;
  const std::string& method = req.method;
  Json body = method == "GET" || method == "DELETE" ? Json::object() : parse_body(req);
  Outcome out;
  auto id = [&] { return id_segment(seg.at(1)); };

  if (pattern == "/auth/login") {
    auto t = login(req_string(body, "username"), req_string(body, "password"));
    auto u = store_.find_user(t.user);
    out.body["token"] = t.token;
    out.body["expires_at"] = to_iso8601(t.expires_at);
    out.body["user"] = user_json(*u, store_);
    return out;
  }

  // users
  if (pattern == "/users") {
    if (method == "GET") {
      out.body = Json::array();
      for (const auto& u : store_.list_users()) out.body.push_back(user_json(u, store_));
      return out;
    }
    auto username = req_string(body, "username");
    std::string password = call.replaying ? std::string("replayed") : req_string(body, "password");
    auto u = registry_.create_user(username, password, UserGroupId(req_int(body, "group")),
                                   opt_string(body, "display_name").value_or(username));
    if (call.replaying) {
      u.password_hash = req_string(body, "password_hash");
      store_.update_user(u);
    }
    out = {201, user_json(u, store_), "user", "create", u.id.value, "created user " + u.username};
    return out;
  }
  if (pattern == "/users/{id}") {
    UserId uid(id());
    if (method == "GET") return query_result(user_json(registry_.user(uid), store_));
    if (method == "PATCH") {
      std::optional<std::string> password = call.replaying ? std::nullopt : opt_string(body, "password");
      std::optional<UserGroupId> group;
      if (auto g = opt_int(body, "group")) group = UserGroupId(*g);
      auto u = registry_.update_user(uid, opt_string(body, "display_name"), group, password);
      if (call.replaying && has(body, "password_hash")) {
        u.password_hash = req_string(body, "password_hash");
        store_.update_user(u);
      }
      return {200, user_json(u, store_), "user", "update", uid.value, "updated " + changed_fields(body)};
    }
    registry_.delete_user(uid);
    Json j;
    j["deleted"] = uid.value;
    return {200, j, "user", "delete", uid.value, "deleted user"};
  }

  // user groups
  if (pattern == "/user-groups") {
    if (method == "GET") {
      out.body = Json::array();
      for (const auto& g : store_.list_user_groups()) out.body.push_back(group_json(g));
      return out;
    }
    if (!has(body, "permissions")) throw Error(ErrorCode::BadRequest, "permissions is required");
    auto g = registry_.create_user_group(req_string(body, "name"), permissions_from(body, "permissions"));
    return {201, group_json(g), "user_group", "create", g.id.value, "created group " + g.name};
  }
  if (pattern == "/user-groups/{id}") {
    UserGroupId gid(id());
    if (method == "GET") return query_result(group_json(registry_.user_group(gid)));
    if (method == "PATCH") {
      std::optional<std::set<Permission>> perms;
      if (has(body, "permissions")) perms = permissions_from(body, "permissions");
      auto g = registry_.update_user_group(gid, opt_string(body, "name"), perms);
      return {200, group_json(g), "user_group", "update", gid.value, "updated " + changed_fields(body)};
    }
    registry_.delete_user_group(gid);
    Json j;
    j["deleted"] = gid.value;
    return {200, j, "user_group", "delete", gid.value, "deleted group"};
  }

  // sponsors
  if (pattern == "/sponsors") {
    if (method == "GET") {
      out.body = Json::array();
      for (const auto& s : store_.list_sponsors()) out.body.push_back(sponsor_json(s));
      return out;
    }
    auto balance = opt_int(body, "balance").value_or(0);
    if (balance < 0) throw Error(ErrorCode::ValidationFailed, "Sponsor.balance >= 0");
    auto s = registry_.create_sponsor(req_string(body, "name"), opt_string(body, "contact").value_or(""));
    if (balance > 0) ledger_.deposit(s.id, Money(balance));
    s = registry_.sponsor(s.id);
    return {201, sponsor_json(s), "sponsor", "create", s.id.value, "created sponsor " + s.name};
  }
  if (pattern == "/sponsors/{id}") {
    SponsorId sid(id());
    if (method == "GET") return query_result(sponsor_json(registry_.sponsor(sid)));
    if (method == "PATCH") {
      if (has(body, "balance"))
        throw Error(ErrorCode::ValidationFailed, "Sponsor.balance changes only through deposits and impressions");
      auto s = registry_.update_sponsor(sid, opt_string(body, "name"), opt_string(body, "contact"),
                                        opt_bool(body, "active"));
      return {200, sponsor_json(s), "sponsor", "update", sid.value, "updated " + changed_fields(body)};
    }
    auto s = registry_.update_sponsor(sid, std::nullopt, std::nullopt, false);
    return {200, sponsor_json(s), "sponsor", "delete", sid.value, "deactivated sponsor"};
  }
  if (pattern == "/sponsors/{id}/deposit") {
    SponsorId sid(id());
    auto amount = req_int(body, "amount");
    if (amount <= 0) throw Error(ErrorCode::NonPositiveAmount, std::to_string(amount));
    auto balance = ledger_.deposit(sid, Money(amount));
    Json j;
    j["sponsor"] = sid.value;
    j["deposited"] = amount;
    j["balance"] = balance.tsh();
    return {200, j, "sponsor", "deposit", sid.value, "deposited " + std::to_string(amount) + " Tsh"};
  }

  // ads
  if (pattern == "/ads") {
    if (method == "GET") {
      std::optional<SponsorId> filter;
      if (auto s = req.param("sponsor"); s && !s->empty()) filter = SponsorId(id_segment(*s));
      out.body = Json::array();
      for (const auto& a : store_.list_ads(filter, false)) out.body.push_back(ad_json(a));
      return out;
    }
    auto a = registry_.create_ad(SponsorId(req_int(body, "sponsor")), req_string(body, "body_sw"));
    return {201, ad_json(a), "ad", "create", a.id.value, "created ad for sponsor " + std::to_string(a.sponsor.value)};
  }
  if (pattern == "/ads/{id}") {
    AdId aid(id());
    if (method == "GET") return query_result(ad_json(registry_.ad(aid)));
    if (method == "PATCH") {
      auto a = registry_.update_ad(aid, opt_string(body, "body_sw"), opt_bool(body, "active"));
      return {200, ad_json(a), "ad", "update", aid.value, "updated " + changed_fields(body)};
    }
    auto a = registry_.update_ad(aid, std::nullopt, false);
    return {200, ad_json(a), "ad", "delete", aid.value, "deactivated ad"};
  }

  // categories
  if (pattern == "/categories") {
    if (method == "GET") {
      out.body = Json::array();
      for (const auto& c : store_.list_categories()) out.body.push_back(category_json(c, registry_));
      return out;
    }
    std::optional<CategoryId> parent;
    if (has(body, "parent") && !body["parent"].is_null()) parent = CategoryId(req_int(body, "parent"));
    auto c = registry_.create_category(parent, req_string(body, "name_sw"), static_cast<int>(req_int(body, "position")));
    return {201, category_json(c, registry_), "category", "create", c.id.value, "created category " + c.name_sw};
  }
  if (pattern == "/categories/{id}") {
    CategoryId cid(id());
    if (method == "GET") return query_result(category_json(registry_.category(cid), registry_));
    CategoryPatch patch;
    if (method == "PATCH") {
      if (has(body, "parent")) {
        if (body["parent"].is_null()) patch.parent = std::optional<CategoryId>{};
        else patch.parent = std::optional<CategoryId>(CategoryId(req_int(body, "parent")));
      }
      patch.name_sw = opt_string(body, "name_sw");
      if (auto p = opt_int(body, "position")) patch.position = static_cast<int>(*p);
      patch.active = opt_bool(body, "active");
      auto c = registry_.update_category(cid, patch);
      return {200, category_json(c, registry_), "category", "update", cid.value, "updated " + changed_fields(body)};
    }
    patch.active = false;
    auto c = registry_.update_category(cid, patch);
    return {200, category_json(c, registry_), "category", "delete", cid.value, "deactivated category"};
  }

  // content
  if (pattern == "/content") {
    if (method == "GET") {
      std::optional<CategoryId> filter;
      if (auto c = req.param("category"); c && !c->empty()) filter = CategoryId(id_segment(*c));
      out.body = Json::array();
      for (const auto& c : store_.list_content(filter, false)) out.body.push_back(content_json(c));
      return out;
    }
    if (!call.actor) throw Error(ErrorCode::Unauthorized, "content needs an author");
    auto added = catalog_.add_content(*call.actor, CategoryId(req_int(body, "category")), req_string(body, "body_sw"));
    auto j = content_json(added.item);
    j["lint_warning"] = added.lint_warning ? Json(*added.lint_warning) : Json(nullptr);
    return {201, j, "content", "create", added.item.id.value,
            "created content in category " + std::to_string(added.item.category.value)};
  }
  if (pattern == "/content/{id}") {
    ContentId cid(id());
    if (method == "GET") {
      auto c = store_.find_content(cid);
      if (!c) throw Error(ErrorCode::UnknownContent, std::to_string(cid.value));
      return query_result(content_json(*c));
    }
    if (method == "PATCH") {
      auto c = catalog_.update_content(cid, opt_string(body, "body_sw"), opt_bool(body, "active"));
      return {200, content_json(c), "content", "update", cid.value, "updated " + changed_fields(body)};
    }
    auto c = catalog_.update_content(cid, std::nullopt, false);
    return {200, content_json(c), "content", "delete", cid.value, "deactivated content"};
  }

  // questions
  if (pattern == "/questions") {
    std::optional<QuestionStatus> status;
    if (auto s = req.param("status"); s && !s->empty()) {
      if (*s == "Open") status = QuestionStatus::Open;
      else if (*s == "Answered") status = QuestionStatus::Answered;
      else throw Error(ErrorCode::BadRequest, "status must be Open or Answered");
    }
    out.body = Json::array();
    for (const auto& q : store_.list_questions(status)) out.body.push_back(question_json(q, store_));
    return out;
  }
  if (pattern == "/questions/{id}") {
    QuestionId qid(id());
    auto q = store_.find_question(qid);
    if (!q) throw Error(ErrorCode::UnknownQuestion, std::to_string(qid.value));
    auto j = question_json(*q, store_);
    Json answers = Json::array();
    for (const auto& a : store_.answers_for(qid)) answers.push_back(answer_json(a));
    j["answers"] = answers;
    return query_result(j);
  }
  if (pattern == "/questions/{id}/answer") {
    QuestionId qid(id());
    if (!call.actor) throw Error(ErrorCode::Unauthorized, "answers need a doctor");
    auto a = catalog_.answer_question(*call.actor, qid, req_string(body, "text"));
    return {201, answer_json(a), "question", "answer", qid.value, "answered question"};
  }

  if (pattern == "/subscribers") {
    auto num = [&](const char* k, std::size_t fallback) -> std::size_t {
      auto v = req.param(k);
      if (!v || v->empty()) return fallback;
      if (!text::all_digits(*v) || v->size() > 9) throw Error(ErrorCode::BadRequest, std::string(k) + " must be a non-negative integer");
      return static_cast<std::size_t>(std::stoul(*v));
    };
    auto offset = num("offset", 0);
    auto limit = std::clamp<std::size_t>(num("limit", 50), 1, 500);
    out.body["total"] = store_.count_subscribers();
    out.body["offset"] = offset;
    out.body["limit"] = limit;
    Json items = Json::array();
    for (const auto& s : store_.list_subscribers(offset, limit)) items.push_back(subscriber_json(s));
    out.body["items"] = items;
    return out;
  }

  if (pattern == "/reports/dashboard") return query_result(dashboard());
  if (pattern == "/reports/impressions") {
    out.body = Json::array();
    for (const auto& r : ledger_.impression_report(period_from_query(req))) out.body.push_back(impression_json(r));
    return out;
  }
  if (pattern == "/reports/sms-costs") return query_result(to_json(outbox_.cost_report(period_from_query(req))));

  throw Error(ErrorCode::NotFound, req.path);
}

Json AdminApi::dashboard() const {
  Json j;
  j["subscribers"] = store_.count_subscribers(SubscriberStatus::Active);
  j["open_questions"] = store_.count_questions(QuestionStatus::Open);
  Json sponsors = Json::array();
  std::size_t impressions = 0;
  for (const auto& r : ledger_.impression_report()) {
    Json s;
    s["id"] = r.sponsor.value;
    s["name"] = r.name;
    s["balance"] = r.remaining.tsh();
    s["impressions"] = r.impressions;
    s["spend"] = r.spend.tsh();
    sponsors.push_back(s);
    impressions += r.impressions;
  }
  j["sponsors"] = sponsors;
  j["impressions"] = impressions;
  j["sms_cost"] = outbox_.cost_report().total_cost.tsh();
  return j;
}

std::size_t AdminApi::replay(const std::vector<AuditEntry>& log) {
  std::size_t applied = 0;
  for (const auto& entry : log) {
    HttpRequest req{entry.method, entry.path, {}, {}, entry.payload};
    auto rest = std::string_view(req.path).substr(kPrefix.size());
    auto seg = path_segments(rest);
    const RouteSpec* route = nullptr;
    for (const auto& r : routes())
      if (r.method == req.method && pattern_matches(r.pattern, seg)) route = &r;
    if (!route || !route->mutation) throw Error(ErrorCode::BadRequest, "not a recorded mutation: " + entry.path);
    std::optional<User> actor;
    if (entry.actor) actor = store_.find_user(*entry.actor);
    auto resp = dispatch(req, *route, seg, actor, true);
    if (resp.status >= 300)
      throw Error(ErrorCode::ValidationFailed, "replay of " + entry.method + " " + entry.path + " failed: " + resp.body);
    ++applied;
  }
  return applied;
}

}  // namespace mservice

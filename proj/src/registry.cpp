#include "mservice/registry.hpp"

#include "mservice/crypto.hpp"
#include "mservice/error.hpp"
#include "mservice/text.hpp"

namespace mservice {

namespace {

[[noreturn]] void violated(const std::string& invariant) { throw Error(ErrorCode::ValidationFailed, invariant); }

std::string require_text(std::string value, const char* invariant) {
  if (text::trim(value).empty()) violated(invariant);
  return value;
}

}  // namespace

Registry::Registry(Store& store, const Config& config, const Clock& clock)
    : store_(store), config_(config), clock_(clock) {}

// ---------------------------------------------------------------- subscribers

Subscriber Registry::register_subscriber(const Msisdn& msisdn, bool consent_ads) {
  return store_.transact([&] {
    auto now = clock_.now();
    Subscriber sub{SubscriberId{}, msisdn, now, SubscriberStatus::Active, consent_ads};
    if (auto existing = store_.find_subscriber_by_msisdn(msisdn)) {
      if (existing->status == SubscriberStatus::Active) throw Error(ErrorCode::AlreadyRegistered, msisdn.value());
      sub.id = existing->id;
      store_.update_subscriber(sub);
    } else {
      sub.id = store_.insert_subscriber(sub);
    }
    if (config_.registration_fee.tsh() > 0)
      store_.append_ledger(
          LedgerEntry{LedgerEntryId{}, std::nullopt, sub.id, config_.registration_fee, LedgerKind::RegistrationFee,
                      std::nullopt, now});
    return sub;
  });
}

Subscriber Registry::unsubscribe(const Msisdn& msisdn) {
  return store_.transact([&] {
    auto sub = store_.find_subscriber_by_msisdn(msisdn);
    if (!sub || sub->status != SubscriberStatus::Active) throw Error(ErrorCode::NotSubscribed, msisdn.value());
    sub->status = SubscriberStatus::Unsubscribed;
    store_.update_subscriber(*sub);
    return *sub;
  });
}

std::optional<Subscriber> Registry::active_subscriber(const Msisdn& msisdn) const {
  auto sub = store_.find_subscriber_by_msisdn(msisdn);
  if (sub && sub->status == SubscriberStatus::Active) return sub;
  return std::nullopt;
}

// ---------------------------------------------------------------- categories

std::vector<Category> Registry::category_children(std::optional<CategoryId> parent) const {
  if (parent && !store_.find_category(*parent))
    throw Error(ErrorCode::UnknownCategory, std::to_string(parent->value));
  return store_.category_children(parent, true);
}

Category Registry::category(CategoryId id) const {
  auto c = store_.find_category(id);
  if (!c) throw Error(ErrorCode::UnknownCategory, std::to_string(id.value));
  return *c;
}

bool Registry::is_leaf(CategoryId id) const { return category_children(id).empty(); }

std::vector<CategoryId> Registry::walk_active_forest() const {
  std::vector<CategoryId> order;
  std::vector<Category> stack;
  auto roots = store_.category_children(std::nullopt, true);
  stack.assign(roots.rbegin(), roots.rend());
  while (!stack.empty()) {
    Category c = stack.back();
    stack.pop_back();
    order.push_back(c.id);
    auto kids = store_.category_children(c.id, true);
    stack.insert(stack.end(), kids.rbegin(), kids.rend());
  }
  return order;
}

void Registry::check_sibling_position(std::optional<CategoryId> parent, int position,
                                      std::optional<CategoryId> self) const {
  for (const auto& sibling : store_.category_children(parent, true))
    if (sibling.position == position && (!self || sibling.id != *self))
      violated("Category.position unique among siblings");
}

void Registry::check_parent_accepts_children(CategoryId parent) const {
  if (!store_.find_category(parent)) throw Error(ErrorCode::UnknownCategory, std::to_string(parent.value));
  // content may only hang off leaves, so a category holding content can't grow children
  if (store_.count_active_content(parent) > 0) violated("ContentItem.category is a leaf");
}

Category Registry::create_category(std::optional<CategoryId> parent, std::string name_sw, int position) {
  return store_.transact([&] {
    Category c{CategoryId{}, parent, require_text(std::move(name_sw), "Category.name_sw non-empty"), position, true};
    if (parent) check_parent_accepts_children(*parent);
    check_sibling_position(parent, position, std::nullopt);
    c.id = store_.insert_category(c);
    return c;
  });
}

Category Registry::update_category(CategoryId id, const CategoryPatch& patch) {
  return store_.transact([&] {
    Category c = category(id);
    bool was_active = c.active;
    bool moved = patch.parent && *patch.parent != c.parent;
    if (patch.parent) c.parent = *patch.parent;
    if (patch.name_sw) c.name_sw = require_text(*patch.name_sw, "Category.name_sw non-empty");
    if (patch.position) c.position = *patch.position;
    if (patch.active) c.active = *patch.active;

    if (moved && c.parent) {
      for (std::optional<CategoryId> cur = c.parent; cur;) {
        if (*cur == id) violated("Category forest has no cycles");
        auto up = store_.find_category(*cur);
        if (!up) throw Error(ErrorCode::UnknownCategory, std::to_string(cur->value));
        cur = up->parent;
      }
    }
    if (c.active && c.parent && (moved || !was_active)) check_parent_accepts_children(*c.parent);
    if (c.active) check_sibling_position(c.parent, c.position, c.id);
    store_.update_category(c);
    return c;
  });
}

// ---------------------------------------------------------------- staff

UserGroup Registry::create_user_group(std::string name, std::set<Permission> permissions) {
  return store_.transact([&] {
    UserGroup g{UserGroupId{}, require_text(std::move(name), "UserGroup.name non-empty"), std::move(permissions)};
    if (g.permissions.empty()) violated("UserGroup.permissions non-empty");
    if (store_.find_user_group_by_name(g.name)) violated("UserGroup.name unique");
    g.id = store_.insert_user_group(g);
    return g;
  });
}

UserGroup Registry::update_user_group(UserGroupId id, std::optional<std::string> name,
                                      std::optional<std::set<Permission>> permissions) {
  return store_.transact([&] {
    UserGroup g = user_group(id);
    if (name) {
      g.name = require_text(std::move(*name), "UserGroup.name non-empty");
      if (auto other = store_.find_user_group_by_name(g.name); other && other->id != id)
        violated("UserGroup.name unique");
    }
    if (permissions) {
      if (permissions->empty()) violated("UserGroup.permissions non-empty");
      g.permissions = std::move(*permissions);
    }
    store_.update_user_group(g);
    return g;
  });
}

void Registry::delete_user_group(UserGroupId id) {
  store_.transact([&] {
    user_group(id);
    if (store_.count_users_in_group(id) > 0) violated("User.group resolves (group still has members)");
    store_.delete_user_group(id);
  });
}

UserGroup Registry::user_group(UserGroupId id) const {
  auto g = store_.find_user_group(id);
  if (!g) throw Error(ErrorCode::UnknownUserGroup, std::to_string(id.value));
  return *g;
}

User Registry::create_user(std::string username, std::string_view password, UserGroupId group,
                           std::string display_name) {
  if (password.empty()) violated("User.password non-empty");
  auto hash = hash_password(password, config_.pwhash_profile);
  return store_.transact([&] {
    User u{UserId{}, require_text(std::move(username), "User.username non-empty"), hash, group,
           std::move(display_name)};
    if (store_.find_user_by_username(u.username)) violated("User.username unique");
    user_group(group);
    u.id = store_.insert_user(u);
    return u;
  });
}

User Registry::update_user(UserId id, std::optional<std::string> display_name, std::optional<UserGroupId> group,
                           std::optional<std::string> password) {
  std::optional<std::string> hash;
  if (password) {
    if (password->empty()) violated("User.password non-empty");
    hash = hash_password(*password, config_.pwhash_profile);
  }
  return store_.transact([&] {
    User u = user(id);
    if (display_name) u.display_name = std::move(*display_name);
    if (group) {
      user_group(*group);
      u.group = *group;
    }
    if (hash) u.password_hash = *hash;
    store_.update_user(u);
    return u;
  });
}

void Registry::delete_user(UserId id) {
  store_.transact([&] {
    user(id);
    if (store_.count_user_references(id) > 0) violated("ContentItem.author/Answer.doctor resolves (user referenced)");
    store_.delete_user(id);
  });
}

User Registry::user(UserId id) const {
  auto u = store_.find_user(id);
  if (!u) throw Error(ErrorCode::UnknownUser, std::to_string(id.value));
  return *u;
}

bool Registry::has_permission(const User& u, Permission p) const {
  auto g = store_.find_user_group(u.group);
  return g && g->has(p);
}

// ---------------------------------------------------------------- sponsors and ads

Sponsor Registry::create_sponsor(std::string name, std::string contact) {
  return store_.transact([&] {
    Sponsor s{SponsorId{}, require_text(std::move(name), "Sponsor.name non-empty"), std::move(contact), Money{}, true};
    if (store_.find_sponsor_by_name(s.name)) violated("Sponsor.name unique");
    s.id = store_.insert_sponsor(s);
    return s;
  });
}

Sponsor Registry::update_sponsor(SponsorId id, std::optional<std::string> name, std::optional<std::string> contact,
                                 std::optional<bool> active) {
  return store_.transact([&] {
    Sponsor s = sponsor(id);
    if (name) {
      s.name = require_text(std::move(*name), "Sponsor.name non-empty");
      if (auto other = store_.find_sponsor_by_name(s.name); other && other->id != id) violated("Sponsor.name unique");
    }
    if (contact) s.contact = std::move(*contact);
    if (active) s.active = *active;
    store_.update_sponsor(s);
    return s;
  });
}

Sponsor Registry::sponsor(SponsorId id) const {
  auto s = store_.find_sponsor(id);
  if (!s) throw Error(ErrorCode::UnknownSponsor, std::to_string(id.value));
  return *s;
}

void Registry::check_ad_body(const std::string& body) const {
  if (text::trim(body).empty()) violated("Ad.body_sw non-empty");
  if (text::length(body) > config_.ad_max_chars)
    violated("Ad.body_sw length <= " + std::to_string(config_.ad_max_chars));
}

Ad Registry::create_ad(SponsorId sponsor_id, std::string body_sw) {
  return store_.transact([&] {
    sponsor(sponsor_id);
    check_ad_body(body_sw);
    Ad a{AdId{}, sponsor_id, std::move(body_sw), true, clock_.now()};
    a.id = store_.insert_ad(a);
    return a;
  });
}

Ad Registry::update_ad(AdId id, std::optional<std::string> body_sw, std::optional<bool> active) {
  return store_.transact([&] {
    Ad a = ad(id);
    if (body_sw) {
      check_ad_body(*body_sw);
      a.body_sw = std::move(*body_sw);
    }
    if (active) a.active = *active;
    store_.update_ad(a);
    return a;
  });
}

Ad Registry::ad(AdId id) const {
  auto a = store_.find_ad(id);
  if (!a) throw Error(ErrorCode::UnknownAd, std::to_string(id.value));
  return *a;
}

}  // namespace mservice

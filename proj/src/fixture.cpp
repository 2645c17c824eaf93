#include "mservice/fixture.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mservice/crypto.hpp"

namespace mservice {

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::FixtureInvalid, path + ": " + why);
}

std::string at(std::string_view section, std::size_t i) { return std::string(section) + "[" + std::to_string(i) + "]"; }

const Json& need(const Json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) invalid(path + "." + key, "required");
  return obj[key];
}

std::string need_string(const Json& obj, const std::string& path, const char* key) {
  const auto& v = need(obj, path, key);
  if (!v.is_string()) invalid(path + "." + key, "must be a string");
  return v.get<std::string>();
}

std::optional<std::string> opt_string(const Json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_string()) invalid(path + "." + key, "must be a string");
  return obj[key].get<std::string>();
}

std::optional<std::int64_t> opt_int(const Json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj[key].is_number_integer()) invalid(path + "." + key, "must be an integer");
  return obj[key].get<std::int64_t>();
}

std::optional<bool> opt_bool(const Json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj[key].is_boolean()) invalid(path + "." + key, "must be a boolean");
  return obj[key].get<bool>();
}

void only_keys(const Json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) invalid(path, "must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) invalid(path + "." + it.key(), "unknown field");
}

// Runs one upsert, turning domain errors into FixtureInvalid at `path`.
template <class F>
void guarded(const std::string& path, F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FixtureInvalid) throw;
    invalid(path, std::string(to_string(e.code())) + (e.detail().empty() ? "" : " (" + e.detail() + ")"));
  }
}

struct CategoryRow {
  std::size_t index;
  std::string key;
  std::optional<std::string> parent;
  std::string name_sw;
  int position;
  bool active;
};

}  // namespace

Json parse_fixture(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t offset = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    auto before = text.substr(0, offset);
    auto line = 1 + std::count(before.begin(), before.end(), '\n');
    auto last_nl = before.rfind('\n');
    auto column = offset - (last_nl == std::string_view::npos ? 0 : last_nl + 1) + 1;
    throw Error(ErrorCode::FixtureInvalid,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": invalid JSON");
  }
}

Json load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FixtureInvalid, path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_fixture(ss.str());
  } catch (const Error& e) {
    throw Error(ErrorCode::FixtureInvalid, path.string() + ": " + e.detail());
  }
}

SeedSummary apply_fixture(Service& service, const Json& doc) {
  if (!doc.is_object()) invalid("$", "fixture must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find(std::begin(kFixtureSections), std::end(kFixtureSections), it.key()) == std::end(kFixtureSections))
      invalid(it.key(), "unknown section");
    if (!it.value().is_array()) invalid(it.key(), "must be an array");
  }
  auto section = [&](std::string_view name) -> const Json& {
    static const Json empty = Json::array();
    auto key = std::string(name);
    return doc.contains(key) ? doc[key] : empty;
  };

  auto& store = service.store();
  auto& registry = service.registry();
  SeedSummary summary;
  for (auto name : kFixtureSections) summary[std::string(name)];

  return store.transact([&] {
    // user groups
    for (std::size_t i = 0; i < section("user_groups").size(); ++i) {
      const auto& g = section("user_groups")[i];
      auto path = at("user_groups", i);
      only_keys(g, path, {"name", "permissions"});
      auto name = need_string(g, path, "name");
      std::set<Permission> perms;
      const auto& list = need(g, path, "permissions");
      if (!list.is_array()) invalid(path + ".permissions", "must be an array");
      for (std::size_t k = 0; k < list.size(); ++k) {
        auto p = list[k].is_string() ? permission_from_string(list[k].get<std::string>()) : std::nullopt;
        if (!p) invalid(path + ".permissions[" + std::to_string(k) + "]", "unknown permission");
        perms.insert(*p);
      }
      auto& count = summary["user_groups"];
      ++count.total;
      guarded(path, [&] {
        if (auto existing = store.find_user_group_by_name(name)) {
          if (existing->permissions != perms) {
            registry.update_user_group(existing->id, std::nullopt, perms);
            ++count.updated;
          }
        } else {
          registry.create_user_group(name, perms);
          ++count.created;
        }
      });
    }

    // users
    for (std::size_t i = 0; i < section("users").size(); ++i) {
      const auto& u = section("users")[i];
      auto path = at("users", i);
      only_keys(u, path, {"username", "password", "group", "display_name"});
      auto username = need_string(u, path, "username");
      auto password = need_string(u, path, "password");
      auto group_name = need_string(u, path, "group");
      auto display = opt_string(u, path, "display_name").value_or(username);
      auto group = store.find_user_group_by_name(group_name);
      if (!group) invalid(path + ".group", "unknown group '" + group_name + "'");
      auto& count = summary["users"];
      ++count.total;
      guarded(path, [&] {
        if (auto existing = store.find_user_by_username(username)) {
          bool same_password = verify_password(existing->password_hash, password);
          if (existing->group != group->id || existing->display_name != display || !same_password) {
            registry.update_user(existing->id, display, group->id,
                                 same_password ? std::nullopt : std::optional<std::string>(password));
            ++count.updated;
          }
        } else {
          registry.create_user(username, password, group->id, display);
          ++count.created;
        }
      });
    }

    // categories: validate the key graph first, then upsert parents before children
    std::vector<CategoryRow> rows;
    std::map<std::string, std::size_t> by_key;
    for (std::size_t i = 0; i < section("categories").size(); ++i) {
      const auto& c = section("categories")[i];
      auto path = at("categories", i);
      only_keys(c, path, {"key", "parent", "name_sw", "position", "active"});
      CategoryRow row{i,
                      need_string(c, path, "key"),
                      opt_string(c, path, "parent"),
                      need_string(c, path, "name_sw"),
                      static_cast<int>(opt_int(c, path, "position").value_or(static_cast<std::int64_t>(i + 1))),
                      opt_bool(c, path, "active").value_or(true)};
      if (by_key.count(row.key)) invalid(path + ".key", "duplicate key '" + row.key + "'");
      by_key[row.key] = rows.size();
      rows.push_back(std::move(row));
    }
    for (const auto& row : rows) {
      if (!row.parent) continue;
      auto path = at("categories", row.index) + ".parent";
      if (!by_key.count(*row.parent)) invalid(path, "unknown category key '" + *row.parent + "'");
      std::set<std::string> seen{row.key};
      std::string trail = row.key;
      for (auto p = row.parent; p; p = rows[by_key.at(*p)].parent) {
        trail += " -> " + *p;
        if (!seen.insert(*p).second) invalid(path, "cycle " + trail);
        if (!by_key.count(*p)) break;
      }
    }
    std::map<std::string, CategoryId> key_ids;
    std::vector<bool> done(rows.size(), false);
    for (std::size_t applied = 0; applied < rows.size();) {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (done[r] || (row.parent && !key_ids.count(*row.parent))) continue;
        std::optional<CategoryId> parent;
        if (row.parent) parent = key_ids.at(*row.parent);
        auto& count = summary["categories"];
        ++count.total;
        guarded(at("categories", row.index), [&] {
          std::optional<Category> existing;
          for (const auto& c : store.category_children(parent, false))
            if (c.name_sw == row.name_sw) existing = c;
          if (existing) {
            if (existing->position != row.position || existing->active != row.active) {
              CategoryPatch patch;
              patch.position = row.position;
              patch.active = row.active;
              registry.update_category(existing->id, patch);
              ++count.updated;
            }
            key_ids[row.key] = existing->id;
          } else {
            auto c = registry.create_category(parent, row.name_sw, row.position);
            if (!row.active) {
              CategoryPatch patch;
              patch.active = false;
              registry.update_category(c.id, patch);
            }
            key_ids[row.key] = c.id;
            ++count.created;
          }
        });
        done[r] = true;
        ++applied;
      }
    }

    // content
    for (std::size_t i = 0; i < section("content").size(); ++i) {
      const auto& c = section("content")[i];
      auto path = at("content", i);
      only_keys(c, path, {"category", "author", "body_sw"});
      auto key = need_string(c, path, "category");
      auto author_name = need_string(c, path, "author");
      auto body = need_string(c, path, "body_sw");
      if (!key_ids.count(key)) invalid(path + ".category", "unknown category key '" + key + "'");
      auto author = store.find_user_by_username(author_name);
      if (!author) invalid(path + ".author", "unknown user '" + author_name + "'");
      if (!registry.has_permission(*author, Permission::Medical))
        invalid(path + ".author", "'" + author_name + "' lacks the medical permission");
      auto category = key_ids.at(key);
      auto& count = summary["content"];
      ++count.total;
      guarded(path, [&] {
        auto items = store.list_content(category, false);
        bool exists = std::any_of(items.begin(), items.end(), [&](const ContentItem& it) { return it.body_sw == body; });
        if (!exists) {
          service.catalog().add_content(*author, category, body);
          ++count.created;
        }
      });
    }

    // sponsors
    for (std::size_t i = 0; i < section("sponsors").size(); ++i) {
      const auto& s = section("sponsors")[i];
      auto path = at("sponsors", i);
      only_keys(s, path, {"name", "contact", "balance"});
      auto name = need_string(s, path, "name");
      auto contact = opt_string(s, path, "contact").value_or("");
      auto balance = opt_int(s, path, "balance").value_or(0);
      if (balance < 0) invalid(path + ".balance", "must be >= 0");
      auto& count = summary["sponsors"];
      ++count.total;
      guarded(path, [&] {
        if (auto existing = store.find_sponsor_by_name(name)) {
          // the opening balance is only deposited once
          if (existing->contact != contact) {
            registry.update_sponsor(existing->id, std::nullopt, contact, std::nullopt);
            ++count.updated;
          }
        } else {
          auto created = registry.create_sponsor(name, contact);
          if (balance > 0) service.ledger().deposit(created.id, Money(balance));
          ++count.created;
        }
      });
    }

    // ads
    for (std::size_t i = 0; i < section("ads").size(); ++i) {
      const auto& a = section("ads")[i];
      auto path = at("ads", i);
      only_keys(a, path, {"sponsor", "body_sw"});
      auto sponsor_name = need_string(a, path, "sponsor");
      auto body = need_string(a, path, "body_sw");
      auto sponsor = store.find_sponsor_by_name(sponsor_name);
      if (!sponsor) invalid(path + ".sponsor", "unknown sponsor '" + sponsor_name + "'");
      auto& count = summary["ads"];
      ++count.total;
      guarded(path, [&] {
        auto ads = store.list_ads(sponsor->id, false);
        bool exists = std::any_of(ads.begin(), ads.end(), [&](const Ad& ad) { return ad.body_sw == body; });
        if (!exists) {
          registry.create_ad(sponsor->id, body);
          ++count.created;
        }
      });
    }

    // subscribers
    for (std::size_t i = 0; i < section("subscribers").size(); ++i) {
      const auto& s = section("subscribers")[i];
      auto path = at("subscribers", i);
      only_keys(s, path, {"msisdn", "consent_ads"});
      auto raw = need_string(s, path, "msisdn");
      auto consent = opt_bool(s, path, "consent_ads").value_or(true);
      std::optional<Msisdn> msisdn;
      guarded(path + ".msisdn", [&] { msisdn = Msisdn::parse(raw); });
      auto& count = summary["subscribers"];
      ++count.total;
      guarded(path, [&] {
        if (auto existing = store.find_subscriber_by_msisdn(*msisdn)) {
          if (existing->status != SubscriberStatus::Active || existing->consent_ads != consent) {
            existing->status = SubscriberStatus::Active;
            existing->consent_ads = consent;
            store.update_subscriber(*existing);
            ++count.updated;
          }
        } else {
          registry.register_subscriber(*msisdn, consent);
          ++count.created;
        }
      });
    }
    return summary;
  });
}

std::string format_summary(const SeedSummary& summary) {
  std::string out;
  for (auto name : kFixtureSections) {
    auto it = summary.find(std::string(name));
    if (it == summary.end()) continue;
    const auto& c = it->second;
    out += std::string(name) + ": " + std::to_string(c.total) + " (created " + std::to_string(c.created) +
           ", updated " + std::to_string(c.updated) + ")\n";
  }
  return out;
}

}  // namespace mservice

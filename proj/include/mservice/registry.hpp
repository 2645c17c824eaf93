#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mservice/clock.hpp"
#include "mservice/config.hpp"
#include "mservice/domain.hpp"
#include "mservice/store.hpp"

namespace mservice {

struct CategoryPatch {
  std::optional<std::optional<CategoryId>> parent;
  std::optional<std::string> name_sw;
  std::optional<int> position;
  std::optional<bool> active;
};

/// Validated access to the ERD entities. Every mutation here checks the
/// entity invariants before touching the store, and raises
/// Error(ValidationFailed) naming the invariant otherwise.
class Registry {
 public:
  Registry(Store& store, const Config& config, const Clock& clock);

  // subscribers
  /// Reactivates an Unsubscribed number. Records a RegistrationFee ledger
  /// entry when registration.fee_tsh > 0.
  Subscriber register_subscriber(const Msisdn& msisdn, bool consent_ads);
  Subscriber unsubscribe(const Msisdn& msisdn);
  std::optional<Subscriber> active_subscriber(const Msisdn& msisdn) const;

  // category forest
  /// Active children in position order; nullopt lists the roots.
  std::vector<Category> category_children(std::optional<CategoryId> parent) const;
  Category category(CategoryId id) const;
  /// A leaf has no active children. Throws UnknownCategory.
  bool is_leaf(CategoryId id) const;
  /// Depth-first pre-order over active categories reachable from the roots.
  std::vector<CategoryId> walk_active_forest() const;

  Category create_category(std::optional<CategoryId> parent, std::string name_sw, int position);
  Category update_category(CategoryId id, const CategoryPatch& patch);

  // staff
  UserGroup create_user_group(std::string name, std::set<Permission> permissions);
  UserGroup update_user_group(UserGroupId id, std::optional<std::string> name,
                              std::optional<std::set<Permission>> permissions);
  /// Hard delete; rejected while users belong to the group.
  void delete_user_group(UserGroupId id);
  UserGroup user_group(UserGroupId id) const;

  User create_user(std::string username, std::string_view password, UserGroupId group, std::string display_name);
  User update_user(UserId id, std::optional<std::string> display_name, std::optional<UserGroupId> group,
                   std::optional<std::string> password);
  /// Hard delete; rejected while the user authored content or answers.
  void delete_user(UserId id);
  User user(UserId id) const;
  bool has_permission(const User& user, Permission p) const;

  // sponsors and ads
  /// New sponsors start at zero balance; funding goes through the ad ledger.
  Sponsor create_sponsor(std::string name, std::string contact);
  Sponsor update_sponsor(SponsorId id, std::optional<std::string> name, std::optional<std::string> contact,
                         std::optional<bool> active);
  Sponsor sponsor(SponsorId id) const;

  Ad create_ad(SponsorId sponsor, std::string body_sw);
  Ad update_ad(AdId id, std::optional<std::string> body_sw, std::optional<bool> active);
  Ad ad(AdId id) const;

  [[nodiscard]] Store& store() const noexcept { return store_; }
  [[nodiscard]] const Config& config() const noexcept { return config_; }
  [[nodiscard]] const Clock& clock() const noexcept { return clock_; }

 private:
  void check_sibling_position(std::optional<CategoryId> parent, int position, std::optional<CategoryId> self) const;
  void check_parent_accepts_children(CategoryId parent) const;
  void check_ad_body(const std::string& body) const;

  Store& store_;
  const Config& config_;
  const Clock& clock_;
};

}  // namespace mservice

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mservice/domain.hpp"

namespace mservice {

/// Relational persistence over an embedded SQLite database. One table per
/// ERD entity plus the ledger, confirmation, delivery, payment, audit and
/// token tables.
///
/// Every call is serialized on one recursive mutex. transact() holds that
/// mutex across BEGIN IMMEDIATE ... COMMIT, so a read-modify-write inside it
/// is atomic with respect to every other caller.
class Store {
 public:
  /// ":memory:" opens a private in-memory database.
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  template <class F>
  auto transact(F&& fn) -> decltype(fn()) {
    std::lock_guard lock(mutex_);
    begin();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        commit();
      } else {
        auto result = fn();
        commit();
        return result;
      }
    } catch (...) {
      rollback();
      throw;
    }
  }

  // user groups
  UserGroupId insert_user_group(const UserGroup& g);
  void update_user_group(const UserGroup& g);
  void delete_user_group(UserGroupId id);
  std::optional<UserGroup> find_user_group(UserGroupId id) const;
  std::optional<UserGroup> find_user_group_by_name(const std::string& name) const;
  std::vector<UserGroup> list_user_groups() const;
  std::size_t count_users_in_group(UserGroupId id) const;

  // users
  UserId insert_user(const User& u);
  void update_user(const User& u);
  void delete_user(UserId id);
  std::optional<User> find_user(UserId id) const;
  std::optional<User> find_user_by_username(const std::string& username) const;
  std::vector<User> list_users() const;
  /// Content items plus answers authored by the user.
  std::size_t count_user_references(UserId id) const;

  // subscribers
  SubscriberId insert_subscriber(const Subscriber& s);
  void update_subscriber(const Subscriber& s);
  std::optional<Subscriber> find_subscriber(SubscriberId id) const;
  std::optional<Subscriber> find_subscriber_by_msisdn(const Msisdn& m) const;
  std::vector<Subscriber> list_subscribers(std::size_t offset, std::size_t limit) const;
  std::size_t count_subscribers(std::optional<SubscriberStatus> status = std::nullopt) const;

  // categories
  CategoryId insert_category(const Category& c);
  void update_category(const Category& c);
  std::optional<Category> find_category(CategoryId id) const;
  std::vector<Category> list_categories() const;
  /// Children ordered by position then id. nullopt parent means roots.
  std::vector<Category> category_children(std::optional<CategoryId> parent, bool active_only) const;

  // content
  ContentId insert_content(const ContentItem& c);
  void update_content(const ContentItem& c);
  std::optional<ContentItem> find_content(ContentId id) const;
  std::vector<ContentItem> list_content(std::optional<CategoryId> category, bool active_only) const;
  std::size_t count_active_content(CategoryId category) const;

  // questions and answers
  QuestionId insert_question(const Question& q);
  void update_question_status(QuestionId id, QuestionStatus status);
  std::optional<Question> find_question(QuestionId id) const;
  std::vector<Question> list_questions(std::optional<QuestionStatus> status) const;
  std::size_t count_questions(std::optional<QuestionStatus> status) const;
  AnswerId insert_answer(const Answer& a);
  std::vector<Answer> answers_for(QuestionId id) const;
  std::vector<Answer> list_answers() const;

  // inbound sms log
  ReceivedSmsId append_received_sms(const ReceivedSms& r);
  std::vector<ReceivedSms> list_received_sms() const;

  // sponsors and ads
  SponsorId insert_sponsor(const Sponsor& s);
  /// Updates name, contact, active and balance.
  void update_sponsor(const Sponsor& s);
  std::optional<Sponsor> find_sponsor(SponsorId id) const;
  std::optional<Sponsor> find_sponsor_by_name(const std::string& name) const;
  std::vector<Sponsor> list_sponsors() const;

  AdId insert_ad(const Ad& a);
  void update_ad(const Ad& a);
  std::optional<Ad> find_ad(AdId id) const;
  /// Ordered by id.
  std::vector<Ad> list_ads(std::optional<SponsorId> sponsor, bool active_only) const;

  // ledger
  LedgerEntryId append_ledger(const LedgerEntry& e);
  std::vector<LedgerEntry> list_ledger(std::optional<SponsorId> sponsor = std::nullopt) const;

  // confirmations
  ConfirmationId insert_confirmation(const PendingConfirmation& c);
  void update_confirmation_state(ConfirmationId id, ConfirmationState s);
  std::optional<PendingConfirmation> find_confirmation(ConfirmationId id) const;
  /// Most recent confirmation carrying this code in the given state.
  std::optional<PendingConfirmation> find_confirmation_by_code(const std::string& code,
                                                               ConfirmationState state) const;
  std::vector<PendingConfirmation> list_confirmations() const;
  std::vector<PendingConfirmation> list_pending_expired_by(Timestamp now) const;
  std::size_t count_confirmations() const;

  // outbound deliveries
  DeliveryId append_delivery(const DeliveryRecord& d);
  std::vector<DeliveryRecord> list_deliveries(std::optional<Msisdn> msisdn = std::nullopt,
                                              Period period = {}) const;
  std::size_t count_deliveries(std::optional<SmsKind> kind = std::nullopt) const;
  std::vector<DeliveryRecord> deliveries_correlated(Correlation c) const;

  // paid access stub
  PaymentIntentId insert_payment_intent(const PaymentIntent& p);
  std::vector<PaymentIntent> list_payment_intents() const;

  // audit log
  AuditId append_audit(const AuditEntry& a);
  std::vector<AuditEntry> list_audit() const;

  // auth tokens
  void insert_token(const AuthToken& t);
  std::optional<AuthToken> find_token(const std::string& token) const;
  std::size_t delete_tokens_expired_by(Timestamp now);

 private:
  void begin();
  void commit();
  void rollback();

  struct Impl;
  std::unique_ptr<Impl> impl_;
  mutable std::recursive_mutex mutex_;
};

}  // namespace mservice

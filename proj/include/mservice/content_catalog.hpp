#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mservice/clock.hpp"
#include "mservice/config.hpp"
#include "mservice/domain.hpp"
#include "mservice/registry.hpp"
#include "mservice/sms.hpp"
#include "mservice/store.hpp"

namespace mservice {

enum class RequestOrigin { Sponsored, Paid };

struct ContentRequest {
  Msisdn msisdn;
  CategoryId category;
  RequestOrigin origin = RequestOrigin::Sponsored;
  /// Redeemed confirmation (Sponsored) or payment intent (Paid).
  std::int64_t authorization = 0;
};

struct AddedContent {
  ContentItem item;
  /// Set when the body needs more than content.max_segments SMS segments.
  std::optional<std::string> lint_warning;
};

class ContentCatalog {
 public:
  /// `seed` drives content selection during delivery: the n-th content
  /// delivery draws with mix_seed(seed, n).
  ContentCatalog(Store& store, Registry& registry, SmsOutbox& outbox, const Config& config, const Clock& clock,
                 std::uint64_t seed);

  /// Uniform choice among the leaf's active items. Throws EmptyCategory.
  ContentItem pick_content(CategoryId category, std::uint64_t rng_seed) const;

  /// Sends the content SMS (plus the ad text in Combined mode when both fit
  /// in one segment). Sponsored requests need a Redeemed confirmation owned
  /// by the same msisdn and category that hasn't been delivered yet;
  /// otherwise NotAuthorized.
  std::vector<DeliveryRecord> deliver_content(const ContentRequest& request);

  /// Paid-access stub: records a payment intent of `amount` and delivers.
  std::vector<DeliveryRecord> deliver_paid(const Msisdn& msisdn, CategoryId category, Money amount);

  Question submit_question(const Msisdn& msisdn, std::string_view question_text);
  Answer answer_question(const User& doctor, QuestionId question, std::string_view answer_text);

  AddedContent add_content(const User& doctor, CategoryId category, std::string body_sw);
  ContentItem update_content(ContentId id, std::optional<std::string> body_sw, std::optional<bool> active);

 private:
  std::uint64_t next_delivery_seed() const;

  Store& store_;
  Registry& registry_;
  SmsOutbox& outbox_;
  const Config& config_;
  const Clock& clock_;
  std::uint64_t seed_;
};

}  // namespace mservice

#include "mservice/content_catalog.hpp"

#include "mservice/crypto.hpp"
#include "mservice/error.hpp"
#include "mservice/text.hpp"

namespace mservice {

ContentCatalog::ContentCatalog(Store& store, Registry& registry, SmsOutbox& outbox, const Config& config,
                               const Clock& clock, std::uint64_t seed)
    : store_(store), registry_(registry), outbox_(outbox), config_(config), clock_(clock), seed_(seed) {}

ContentItem ContentCatalog::pick_content(CategoryId category, std::uint64_t rng_seed) const {
  auto items = store_.list_content(category, true);
  if (items.empty()) throw Error(ErrorCode::EmptyCategory, std::to_string(category.value));
  return items[seeded_uniform(rng_seed, "content", items.size())];
}

std::uint64_t ContentCatalog::next_delivery_seed() const {
  return mix_seed(seed_, store_.count_deliveries(SmsKind::Content));
}

std::vector<DeliveryRecord> ContentCatalog::deliver_content(const ContentRequest& request) {
  return store_.transact([&] {
    std::optional<Ad> ad;
    Correlation corr{Correlation::Kind::Payment, request.authorization};
    if (request.origin == RequestOrigin::Sponsored) {
      auto pc = store_.find_confirmation(ConfirmationId(request.authorization));
      if (!pc || pc->state != ConfirmationState::Redeemed || pc->msisdn != request.msisdn ||
          pc->category != request.category)
        throw Error(ErrorCode::NotAuthorized, "no redeemed confirmation for this request");
      corr = Correlation{Correlation::Kind::Confirmation, pc->id.value};
      for (const auto& d : store_.deliveries_correlated(corr))
        if (d.kind == SmsKind::Content) throw Error(ErrorCode::NotAuthorized, "confirmation already delivered");
      ad = store_.find_ad(pc->ad);
    } else {
      bool found = false;
      for (const auto& p : store_.list_payment_intents())
        if (p.id.value == request.authorization && p.msisdn == request.msisdn && p.category == request.category)
          found = true;
      if (!found) throw Error(ErrorCode::NotAuthorized, "no payment intent for this request");
    }

    auto item = pick_content(request.category, next_delivery_seed());
    std::string body = item.body_sw;
    if (config_.delivery_mode == DeliveryMode::Combined && ad) {
      // one SMS only when the bundle still fits a single segment
      std::string bundle = ad->body_sw + "\n" + item.body_sw;
      if (text::length(bundle) <= kSmsSegmentChars) body = std::move(bundle);
    }
    return std::vector<DeliveryRecord>{outbox_.send_sms(request.msisdn, body, SmsKind::Content, corr)};
  });
}

std::vector<DeliveryRecord> ContentCatalog::deliver_paid(const Msisdn& msisdn, CategoryId category, Money amount) {
  return store_.transact([&] {
    if (!registry_.active_subscriber(msisdn)) throw Error(ErrorCode::NotSubscribed, msisdn.value());
    if (!registry_.is_leaf(category)) throw Error(ErrorCode::NotALeaf, std::to_string(category.value));
    if (store_.count_active_content(category) == 0)
      throw Error(ErrorCode::EmptyCategory, std::to_string(category.value));
    PaymentIntent intent{PaymentIntentId{}, msisdn, category, amount, clock_.now()};
    intent.id = store_.insert_payment_intent(intent);
    return deliver_content(ContentRequest{msisdn, category, RequestOrigin::Paid, intent.id.value});
  });
}

Question ContentCatalog::submit_question(const Msisdn& msisdn, std::string_view question_text) {
  auto body = std::string(text::trim(question_text));
  auto sub = registry_.active_subscriber(msisdn);
  if (!sub) throw Error(ErrorCode::NotSubscribed, msisdn.value());
  if (body.empty()) throw Error(ErrorCode::EmptyText);
  Question q{QuestionId{}, sub->id, std::move(body), clock_.now(), QuestionStatus::Open};
  q.id = store_.insert_question(q);
  return q;
}

Answer ContentCatalog::answer_question(const User& doctor, QuestionId question, std::string_view answer_text) {
  if (!registry_.has_permission(doctor, Permission::Medical)) throw Error(ErrorCode::NotADoctor, doctor.username);
  auto body = std::string(text::trim(answer_text));
  return store_.transact([&] {
    auto q = store_.find_question(question);
    if (!q) throw Error(ErrorCode::UnknownQuestion, std::to_string(question.value));
    if (q->status == QuestionStatus::Answered && !config_.allow_multiple_answers)
      throw Error(ErrorCode::AlreadyAnswered, std::to_string(question.value));
    if (body.empty()) throw Error(ErrorCode::EmptyText);
    auto asker = store_.find_subscriber(q->subscriber);
    Answer a{AnswerId{}, question, doctor.id, body, clock_.now()};
    a.id = store_.insert_answer(a);
    store_.update_question_status(question, QuestionStatus::Answered);
    outbox_.send_sms(asker->msisdn, "Jibu la daktari: " + body, SmsKind::Answer,
                     Correlation{Correlation::Kind::Question, question.value});
    return a;
  });
}

AddedContent ContentCatalog::add_content(const User& doctor, CategoryId category, std::string body_sw) {
  if (!registry_.has_permission(doctor, Permission::Medical)) throw Error(ErrorCode::NotADoctor, doctor.username);
  return store_.transact([&] {
    if (!registry_.is_leaf(category)) throw Error(ErrorCode::NotALeaf, std::to_string(category.value));
    if (text::trim(body_sw).empty()) throw Error(ErrorCode::EmptyText);
    AddedContent out{ContentItem{ContentId{}, category, std::move(body_sw), doctor.id, clock_.now(), true},
                     std::nullopt};
    out.item.id = store_.insert_content(out.item);
    auto segments = segment_message(out.item.body_sw).size();
    if (segments > config_.content_max_segments)
      out.lint_warning = "body needs " + std::to_string(segments) + " SMS segments (max " +
                         std::to_string(config_.content_max_segments) + ")";
    return out;
  });
}

ContentItem ContentCatalog::update_content(ContentId id, std::optional<std::string> body_sw,
                                           std::optional<bool> active) {
  return store_.transact([&] {
    auto item = store_.find_content(id);
    if (!item) throw Error(ErrorCode::UnknownContent, std::to_string(id.value));
    if (body_sw) {
      if (text::trim(*body_sw).empty()) throw Error(ErrorCode::EmptyText);
      item->body_sw = std::move(*body_sw);
    }
    if (active) {
      if (*active && !item->active && !registry_.is_leaf(item->category))
        throw Error(ErrorCode::NotALeaf, std::to_string(item->category.value));
      item->active = *active;
    }
    store_.update_content(*item);
    return *item;
  });
}

}  // namespace mservice

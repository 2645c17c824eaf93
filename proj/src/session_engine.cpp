#include "mservice/session_engine.hpp"

#include <algorithm>

#include "mservice/error.hpp"
#include "mservice/text.hpp"

namespace mservice {

std::string_view to_string(SessionState s) noexcept {
  switch (s) {
    case SessionState::AwaitRegistration: return "AwaitRegistration";
    case SessionState::AwaitConsent: return "AwaitConsent";
    case SessionState::Browsing: return "Browsing";
    case SessionState::Ended: return "Ended";
  }
  return "?";
}

Transition transition(SessionState state, InputClass input) noexcept {
  using S = SessionState;
  using I = InputClass;
  switch (state) {
    case S::AwaitRegistration:
      return {S::Ended, Effect::RegistrationHint};
    case S::AwaitConsent:
      if (input == I::Proceed) return {S::Browsing, Effect::EnterMenu};
      if (input == I::Quit) return {S::Ended, Effect::Farewell};
      return {S::AwaitConsent, Effect::Invalid};
    case S::Browsing:
      switch (input) {
        case I::ChoiceBranch: return {S::Browsing, Effect::Descend};
        case I::ChoiceLeaf: return {S::Ended, Effect::HandOff};
        case I::More: return {S::Browsing, Effect::NextPage};
        case I::Back: return {S::Browsing, Effect::Back};
        default: return {S::Browsing, Effect::Invalid};
      }
    case S::Ended:
      return {S::Ended, Effect::Rejected};
  }
  return {S::Ended, Effect::Rejected};
}

namespace {

std::string option_line(std::size_t number, std::string_view name) {
  return std::to_string(number) + ". " + std::string(name);
}

// Room a notice line ("Chaguo si sahihi.") plus its newline takes above a menu.
std::size_t notice_reserve() {
  return std::max(text::length(replies::kInvalidChoice), text::length(replies::kNoContentHere)) + 1;
}

}  // namespace

SessionEngine::SessionEngine(Registry& registry, AdLedger& ledger, ContentCatalog& catalog, const Config& config,
                             const Clock& clock, std::uint64_t seed)
    : registry_(registry), ledger_(ledger), catalog_(catalog), config_(config), clock_(clock), ids_(seed, "session") {}

std::string SessionEngine::registration_hint() const {
  return "Hujasajiliwa. Tuma neno " + config_.registration_keyword + " kwenda " + config_.registration_shortcode +
         " ili kujiunga na huduma.";
}

std::vector<Category> SessionEngine::node_children(const std::vector<CategoryId>& path) const {
  std::optional<CategoryId> parent;
  for (auto id : path) {
    auto c = registry_.category(id);
    if (!c.active || c.parent != parent) throw Error(ErrorCode::UnknownCategory, std::to_string(id.value));
    parent = id;
  }
  return registry_.category_children(parent);
}

std::vector<SessionEngine::PageSpan> SessionEngine::paginate(const std::vector<Category>& children,
                                                             bool at_root) const {
  const std::size_t budget = config_.reply_max_chars - notice_reserve();
  const std::size_t limit = std::min<std::size_t>(config_.page_size, 8);
  const std::size_t max_name = budget - 3 - text::length(replies::kMore) - text::length(replies::kBack) - 2;

  auto fits = [&](std::size_t start, std::size_t count, bool more, bool back) {
    std::size_t len = 0, lines = 0;
    for (std::size_t i = 0; i < count; ++i) {
      len += text::length(option_line(i + 1, text::take(children[start + i].name_sw, max_name)));
      ++lines;
    }
    if (more) len += text::length(replies::kMore), ++lines;
    if (back) len += text::length(replies::kBack), ++lines;
    return len + (lines ? lines - 1 : 0) <= budget;
  };

  std::vector<PageSpan> pages;
  std::size_t start = 0;
  while (start < children.size()) {
    bool back = !at_root || !pages.empty();
    std::size_t count = 0;
    // grow while the page still fits with a trailing "more" line, or fits
    // without it when it would take every remaining item
    while (count < limit && start + count < children.size()) {
      std::size_t next = count + 1;
      bool last = start + next == children.size();
      if (!fits(start, next, !last, back) && !(last && fits(start, next, false, back))) break;
      count = next;
    }
    if (count == 0) count = 1;  // unreachable with names capped at max_name
    pages.push_back({start, count});
    start += count;
  }
  return pages;
}

std::string SessionEngine::render_page(const std::vector<Category>& children, const std::vector<PageSpan>& pages,
                                       std::size_t page, bool at_root) const {
  if (page >= pages.size()) throw Error(ErrorCode::InvalidInput, "page " + std::to_string(page));
  const std::size_t budget = config_.reply_max_chars - notice_reserve();
  const std::size_t max_name = budget - 3 - text::length(replies::kMore) - text::length(replies::kBack) - 2;
  std::vector<std::string> lines;
  const auto& span = pages[page];
  for (std::size_t i = 0; i < span.count; ++i)
    lines.push_back(option_line(i + 1, text::take(children[span.start + i].name_sw, max_name)));
  if (page + 1 < pages.size()) lines.emplace_back(replies::kMore);
  if (page > 0 || !at_root) lines.emplace_back(replies::kBack);
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string SessionEngine::render_menu(const std::vector<CategoryId>& path, std::size_t page) const {
  auto children = node_children(path);
  if (path.empty() && children.empty()) throw Error(ErrorCode::ServiceEmpty);
  auto pages = paginate(children, path.empty());
  if (pages.empty()) {
    // a node with no active children: only the way back remains
    if (page != 0) throw Error(ErrorCode::InvalidInput, "page " + std::to_string(page));
    return std::string(replies::kBack);
  }
  return render_page(children, pages, page, path.empty());
}

std::size_t SessionEngine::page_count(const std::vector<CategoryId>& path) const {
  auto children = node_children(path);
  return std::max<std::size_t>(1, paginate(children, path.empty()).size());
}

// Renders the session's current menu. If the tree changed under the
// session (category removed, fewer pages) it falls back to a valid view.
std::string SessionEngine::with_notice(std::string_view notice, UssdSession& s) const {
  std::string menu;
  try {
    menu = render_menu(s.category_path, s.page);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ServiceEmpty) throw;
    if (e.code() == ErrorCode::InvalidInput && s.page > 0) {
      s.page = page_count(s.category_path) - 1;
    } else {
      s.category_path.clear();
      s.page = 0;
    }
    menu = render_menu(s.category_path, s.page);
  }
  if (notice.empty()) return menu;
  return std::string(notice) + "\n" + menu;
}

bool SessionEngine::stale(const UssdSession& s, Timestamp now) const {
  return now - s.last_activity > config_.session_timeout;
}

UssdReply SessionEngine::begin_session(const Msisdn& msisdn, const UssdCode& code) {
  if (code.service != config_.service_code)
    throw Error(ErrorCode::WrongServiceCode, render(code) + " (expected *" + config_.service_code + "#)");

  if (!code.args.empty()) {
    if (!registry_.active_subscriber(msisdn)) return {registration_hint(), Disposition::End, {}};
    if (code.args.size() != 1 || code.args[0].size() != 6) return {std::string(replies::kBadCode), Disposition::End, {}};
    return redeem(msisdn, code.args[0]);
  }

  // An unregistered caller passes through AwaitRegistration straight to
  // Ended, so no session is stored for them.
  if (!registry_.active_subscriber(msisdn)) return {registration_hint(), Disposition::End, {}};

  auto now = clock_.now();
  std::lock_guard lock(map_mutex_);
  if (auto it = by_msisdn_.find(msisdn.value()); it != by_msisdn_.end()) {
    auto entry = sessions_.at(it->second);
    std::lock_guard elock(entry->mutex);
    if (entry->session.state != SessionState::Ended && !stale(entry->session, now))
      throw Error(ErrorCode::SessionAlreadyOpen, msisdn.value());
    entry->session.state = SessionState::Ended;
    sessions_.erase(it->second);
    by_msisdn_.erase(it);
  }
  std::string id;
  do id = ids_.hex(8);
  while (sessions_.count(id));

  auto entry = std::make_shared<Entry>(UssdSession{id, msisdn, SessionState::AwaitConsent, {}, 0, now, now});
  sessions_.emplace(id, entry);
  by_msisdn_.emplace(msisdn.value(), id);
  return {std::string(replies::kConsent), Disposition::Continue, id};
}

UssdReply SessionEngine::redeem(const Msisdn& msisdn, const std::string& code) {
  try {
    auto& store = registry_.store();
    store.transact([&] {
      auto pc = ledger_.redeem_confirmation(msisdn, code);
      catalog_.deliver_content(ContentRequest{msisdn, pc.category, RequestOrigin::Sponsored, pc.id.value});
    });
    return {std::string(replies::kRedeemed), Disposition::End, {}};
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::ExpiredCode: return {std::string(replies::kExpiredCode), Disposition::End, {}};
      case ErrorCode::UnknownCode:
      case ErrorCode::WrongMsisdn:
      case ErrorCode::NotAuthorized: return {std::string(replies::kBadCode), Disposition::End, {}};
      case ErrorCode::EmptyCategory: return {std::string(replies::kServiceEmpty), Disposition::End, {}};
      default: throw;
    }
  }
}

InputClass SessionEngine::classify(const UssdSession& s, std::string_view raw) const {
  auto input = text::trim(raw);
  if (input.empty()) return InputClass::Empty;
  if (!text::all_digits(input)) return InputClass::NonNumeric;

  if (s.state == SessionState::AwaitConsent) {
    if (input == "1") return InputClass::Proceed;
    if (input == "2") return InputClass::Quit;
    return InputClass::ChoiceOutOfRange;
  }
  if (s.state != SessionState::Browsing) return InputClass::ChoiceOutOfRange;

  auto children = node_children(s.category_path);
  auto pages = paginate(children, s.category_path.empty());
  if (input == "0") return s.page + 1 < pages.size() ? InputClass::More : InputClass::MoreUnavailable;
  if (input == "9")
    return (s.page > 0 || !s.category_path.empty()) ? InputClass::Back : InputClass::BackUnavailable;
  if (input.size() > 1 || s.page >= pages.size()) return InputClass::ChoiceOutOfRange;
  std::size_t k = static_cast<std::size_t>(input[0] - '0');
  const auto& span = pages[s.page];
  if (k < 1 || k > span.count) return InputClass::ChoiceOutOfRange;
  return registry_.is_leaf(children[span.start + k - 1].id) ? InputClass::ChoiceLeaf : InputClass::ChoiceBranch;
}

UssdReply SessionEngine::hand_off(UssdSession& s, CategoryId leaf) {
  auto end = [&](std::string_view text) {
    s.state = SessionState::Ended;
    return UssdReply{std::string(text), Disposition::End, s.id};
  };
  try {
    ledger_.reserve_request(s.msisdn, leaf);
    return end(replies::kWillSend);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::NoActiveSponsor:
      case ErrorCode::ConsentRequired:
        if (config_.fallback_policy == FallbackPolicy::DeliverFree) {
          catalog_.deliver_paid(s.msisdn, leaf, Money{0});
          return end(replies::kWillSend);
        }
        return end(replies::kNoSponsor);
      case ErrorCode::EmptyCategory:
        // stay on the same menu; nothing was charged
        return {with_notice(replies::kNoContentHere, s), Disposition::Continue, s.id};
      case ErrorCode::NotSubscribed: return end(registration_hint());
      default: throw;
    }
  }
}

UssdReply SessionEngine::apply(UssdSession& s, std::string_view input) {
  auto cls = classify(s, input);
  auto t = transition(s.state, cls);
  auto cont = [&](std::string text) { return UssdReply{std::move(text), Disposition::Continue, s.id}; };

  switch (t.effect) {
    case Effect::Rejected: throw Error(ErrorCode::UnknownSession, s.id);
    case Effect::RegistrationHint:
      s.state = SessionState::Ended;
      return {registration_hint(), Disposition::End, s.id};
    case Effect::Farewell:
      s.state = SessionState::Ended;
      return {std::string(replies::kFarewell), Disposition::End, s.id};
    case Effect::Invalid:
      if (s.state == SessionState::AwaitConsent)
        return cont(std::string(replies::kInvalidChoice) + "\n" + std::string(replies::kConsent));
      return cont(with_notice(replies::kInvalidChoice, s));
    case Effect::EnterMenu:
      s.category_path.clear();
      s.page = 0;
      s.state = SessionState::Browsing;
      return cont(with_notice({}, s));
    case Effect::NextPage:
      ++s.page;
      return cont(with_notice({}, s));
    case Effect::Back:
      if (s.page > 0) {
        --s.page;
      } else {
        s.category_path.pop_back();
      }
      return cont(with_notice({}, s));
    case Effect::Descend:
    case Effect::HandOff: {
      auto children = node_children(s.category_path);
      auto pages = paginate(children, s.category_path.empty());
      auto chosen = children[pages[s.page].start + static_cast<std::size_t>(text::trim(input)[0] - '1')].id;
      if (t.effect == Effect::HandOff) return hand_off(s, chosen);
      s.category_path.push_back(chosen);
      s.page = 0;
      return cont(with_notice({}, s));
    }
  }
  throw Error(ErrorCode::InvalidInput);
}

void SessionEngine::forget(const std::string& session_id) {
  std::lock_guard lock(map_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return;
  auto key = it->second->session.msisdn.value();
  sessions_.erase(it);
  if (auto m = by_msisdn_.find(key); m != by_msisdn_.end() && m->second == session_id) by_msisdn_.erase(m);
}

UssdReply SessionEngine::handle_input(const std::string& session_id, std::string_view input) {
  std::shared_ptr<Entry> entry;
  {
    std::lock_guard lock(map_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, session_id);
    entry = it->second;
  }

  std::optional<UssdReply> reply;
  bool ended = false;
  std::optional<Error> failure;
  {
    std::lock_guard elock(entry->mutex);
    auto& s = entry->session;
    auto now = clock_.now();
    if (s.state == SessionState::Ended || stale(s, now)) {
      s.state = SessionState::Ended;
      ended = true;
      failure = Error(ErrorCode::UnknownSession, session_id);
    } else {
      try {
        reply = apply(s, input);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ServiceEmpty) throw;
        s.state = SessionState::Ended;
        reply = UssdReply{std::string(replies::kServiceEmpty), Disposition::End, s.id};
      }
      s.last_activity = now;
      ended = s.state == SessionState::Ended;
    }
  }
  if (ended) forget(session_id);
  if (failure) throw *failure;
  return *reply;
}

std::size_t SessionEngine::expire_sessions(Timestamp now) {
  std::vector<std::pair<std::string, std::shared_ptr<Entry>>> all;
  {
    std::lock_guard lock(map_mutex_);
    all.assign(sessions_.begin(), sessions_.end());
  }
  std::size_t n = 0;
  for (auto& [id, entry] : all) {
    bool drop = false;
    {
      std::lock_guard elock(entry->mutex);
      if (entry->session.state == SessionState::Ended || stale(entry->session, now)) {
        entry->session.state = SessionState::Ended;
        drop = true;
      }
    }
    if (drop) {
      forget(id);
      ++n;
    }
  }
  return n;
}

std::optional<UssdSession> SessionEngine::session(const std::string& session_id) const {
  std::shared_ptr<Entry> entry;
  {
    std::lock_guard lock(map_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    entry = it->second;
  }
  std::lock_guard elock(entry->mutex);
  return entry->session;
}

std::optional<UssdSession> SessionEngine::session_for(const Msisdn& msisdn) const {
  std::string id;
  {
    std::lock_guard lock(map_mutex_);
    auto it = by_msisdn_.find(msisdn.value());
    if (it == by_msisdn_.end()) return std::nullopt;
    id = it->second;
  }
  return session(id);
}

std::size_t SessionEngine::open_sessions() const {
  std::lock_guard lock(map_mutex_);
  return sessions_.size();
}

}  // namespace mservice

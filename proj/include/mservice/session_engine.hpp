#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mservice/ad_ledger.hpp"
#include "mservice/clock.hpp"
#include "mservice/config.hpp"
#include "mservice/content_catalog.hpp"
#include "mservice/crypto.hpp"
#include "mservice/registry.hpp"
#include "mservice/ussd.hpp"

namespace mservice {

enum class SessionState { AwaitRegistration, AwaitConsent, Browsing, Ended };
enum class Disposition { Continue, End };

std::string_view to_string(SessionState s) noexcept;

struct UssdReply {
  std::string text;
  Disposition disposition = Disposition::End;
  /// Empty when no interactive session exists (registration hint,
  /// code redemption, errors before a session opened).
  std::string session_id;
};

struct UssdSession {
  std::string id;
  Msisdn msisdn;
  SessionState state = SessionState::AwaitConsent;
  std::vector<CategoryId> category_path;
  std::size_t page = 0;
  Timestamp started_at;
  Timestamp last_activity;
};

/// What a piece of menu input means in the current state.
enum class InputClass {
  Empty,
  NonNumeric,
  Proceed,           // "1" at the consent prompt
  Quit,              // "2" at the consent prompt
  ChoiceBranch,      // option whose category has children
  ChoiceLeaf,        // option whose category is a leaf
  ChoiceOutOfRange,  // digit that selects nothing
  More,              // "0" with a further page
  MoreUnavailable,   // "0" on the last page
  Back,              // "9" with a previous page or parent
  BackUnavailable,   // "9" on the first root page
};

enum class Effect {
  RegistrationHint,  // tell the caller how to subscribe, end
  EnterMenu,         // show the root menu
  Farewell,          // caller quit
  Descend,           // open the chosen subcategory
  HandOff,           // leaf chosen: reserve the sponsored request, end
  NextPage,
  Back,              // previous page, else parent menu
  Invalid,           // re-render with an error line, state unchanged
  Rejected,          // terminal state: UnknownSession
};

struct Transition {
  SessionState next;
  Effect effect;
};

inline constexpr InputClass kAllInputClasses[] = {
    InputClass::Empty,        InputClass::NonNumeric,       InputClass::Proceed, InputClass::Quit,
    InputClass::ChoiceBranch, InputClass::ChoiceLeaf,       InputClass::ChoiceOutOfRange,
    InputClass::More,         InputClass::MoreUnavailable,  InputClass::Back,    InputClass::BackUnavailable,
};
inline constexpr SessionState kAllSessionStates[] = {SessionState::AwaitRegistration, SessionState::AwaitConsent,
                                                     SessionState::Browsing, SessionState::Ended};

/// The session state machine. Total over every (state, input class) pair.
Transition transition(SessionState state, InputClass input) noexcept;

/// Swahili strings the engine replies with.
namespace replies {
inline constexpr std::string_view kConsent =
    "Karibu M-Afya ya Mama. Huduma hii ni bure, lakini utapokea tangazo kwa SMS.\n1. Endelea\n2. Ondoka";
inline constexpr std::string_view kFarewell = "Asante kwa kutumia M-Afya ya Mama. Kwaheri.";
inline constexpr std::string_view kWillSend = "Asante. Taarifa uliyochagua itatumwa kwenye simu yako kwa SMS.";
inline constexpr std::string_view kInvalidChoice = "Chaguo si sahihi.";
inline constexpr std::string_view kNoContentHere = "Hakuna taarifa hapa.";
inline constexpr std::string_view kServiceEmpty = "Samahani, hakuna taarifa kwa sasa.";
inline constexpr std::string_view kNoSponsor =
    "Samahani, hakuna mdhamini kwa sasa. Huduma ya bure haipatikani; tumia huduma ya kulipia (paid access).";
inline constexpr std::string_view kRedeemed = "Asante. Taarifa uliyoomba imetumwa kwa SMS.";
inline constexpr std::string_view kBadCode = "Msimbo si sahihi.";
inline constexpr std::string_view kExpiredCode = "Msimbo umekwisha muda wake. Piga huduma upya.";
inline constexpr std::string_view kMore = "0. Zaidi";
inline constexpr std::string_view kBack = "9. Rudi";
}  // namespace replies

/// Serves USSD menu sessions. One open session per msisdn; operations on a
/// session are serialized, distinct sessions proceed in parallel.
class SessionEngine {
 public:
  SessionEngine(Registry& registry, AdLedger& ledger, ContentCatalog& catalog, const Config& config,
                const Clock& clock, std::uint64_t seed);

  /// Throws WrongServiceCode, SessionAlreadyOpen.
  UssdReply begin_session(const Msisdn& msisdn, const UssdCode& code);

  /// Throws UnknownSession (including sessions that timed out). Invalid
  /// input does not throw; the reply re-renders the menu with an error line.
  UssdReply handle_input(const std::string& session_id, std::string_view input);

  /// Numbered menu for the node at the end of `path` (roots when empty).
  /// Throws UnknownCategory, ServiceEmpty, or InvalidInput for a page past
  /// the end.
  std::string render_menu(const std::vector<CategoryId>& path, std::size_t page) const;

  /// Number of pages the node's menu spans.
  std::size_t page_count(const std::vector<CategoryId>& path) const;

  std::size_t expire_sessions(Timestamp now);

  std::optional<UssdSession> session(const std::string& session_id) const;
  std::optional<UssdSession> session_for(const Msisdn& msisdn) const;
  std::size_t open_sessions() const;

  std::string registration_hint() const;

 private:
  struct Entry {
    explicit Entry(UssdSession s) : session(std::move(s)) {}
    std::mutex mutex;
    UssdSession session;
  };
  struct PageSpan {
    std::size_t start;
    std::size_t count;
  };

  std::vector<Category> node_children(const std::vector<CategoryId>& path) const;
  std::vector<PageSpan> paginate(const std::vector<Category>& children, bool at_root) const;
  std::string render_page(const std::vector<Category>& children, const std::vector<PageSpan>& pages,
                          std::size_t page, bool at_root) const;
  InputClass classify(const UssdSession& s, std::string_view input) const;
  UssdReply apply(UssdSession& s, std::string_view input);
  UssdReply redeem(const Msisdn& msisdn, const std::string& code);
  UssdReply hand_off(UssdSession& s, CategoryId leaf);
  std::string with_notice(std::string_view notice, UssdSession& s) const;
  bool stale(const UssdSession& s, Timestamp now) const;
  void forget(const std::string& session_id);

  Registry& registry_;
  AdLedger& ledger_;
  ContentCatalog& catalog_;
  const Config& config_;
  const Clock& clock_;
  SeededRandom ids_;

  mutable std::mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::map<std::string, std::string> by_msisdn_;
};

}  // namespace mservice

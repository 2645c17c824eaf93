#include "mservice/scenario.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "httplib.h"

#include "mservice/fixture.hpp"

namespace mservice {

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::FixtureInvalid, path + ": " + why);
}

std::string indent(const std::string& text, const std::string& first, const std::string& rest) {
  std::string out = first;
  for (char c : text) {
    out += c;
    if (c == '\n') out += rest;
  }
  return out + "\n";
}

std::string action_name(StepAction a) {
  switch (a) {
    case StepAction::Dial: return "dial";
    case StepAction::Input: return "input";
    case StepAction::Sms: return "sms";
  }
  return "?";
}

}  // namespace

Timestamp simulation_epoch() { return from_unix(1767254400); }  // 2026-01-01T08:00:00Z

Scenario parse_scenario(const Json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) invalid("$", "script must be a JSON object");
  Scenario s;
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "fixture" && it.key() != "steps") invalid(it.key(), "unknown field");
  if (doc.contains("fixture") && !doc["fixture"].is_null()) {
    if (!doc["fixture"].is_string()) invalid("fixture", "must be a string");
    std::filesystem::path p = doc["fixture"].get<std::string>();
    s.fixture = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  }
  if (!doc.contains("steps") || !doc["steps"].is_array()) invalid("steps", "must be an array");
  const auto& steps = doc["steps"];
  for (std::size_t i = 0; i < steps.size(); ++i) {
    auto path = "steps[" + std::to_string(i) + "]";
    const auto& st = steps[i];
    if (!st.is_object()) invalid(path, "must be an object");
    auto str = [&](const char* key, bool required) -> std::optional<std::string> {
      if (!st.contains(key) || st[key].is_null()) {
        if (required) invalid(path + "." + key, "required");
        return std::nullopt;
      }
      if (!st[key].is_string()) invalid(path + "." + key, "must be a string");
      return st[key].get<std::string>();
    };
    for (auto it = st.begin(); it != st.end(); ++it) {
      static const std::set<std::string> known{"actor", "action", "payload", "shortcode", "expect", "expect_sms"};
      if (!known.count(it.key())) invalid(path + "." + it.key(), "unknown field");
    }
    ScenarioStep step;
    step.actor = *str("actor", true);
    auto action = *str("action", true);
    if (action == "dial") step.action = StepAction::Dial;
    else if (action == "input") step.action = StepAction::Input;
    else if (action == "sms") step.action = StepAction::Sms;
    else invalid(path + ".action", "must be dial, input or sms");
    step.payload = str("payload", true).value();
    step.shortcode = str("shortcode", false);
    if (step.action == StepAction::Sms && !step.shortcode) invalid(path + ".shortcode", "required for sms steps");
    step.expect = str("expect", false);
    step.expect_sms = str("expect_sms", false);
    s.steps.push_back(std::move(step));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FixtureInvalid, path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  Json doc;
  try {
    doc = parse_fixture(ss.str());
  } catch (const Error& e) {
    throw Error(ErrorCode::FixtureInvalid, path.string() + ": " + e.detail());
  }
  return parse_scenario(doc, path.parent_path());
}

EmbeddedClient::EmbeddedClient(Service& service, ManualClock* clock) : service_(service), clock_(clock) {}

HttpResponse EmbeddedClient::send(const HttpRequest& req) {
  if (clock_) clock_->advance(std::chrono::seconds(1));
  return service_.handle(req);
}

struct RemoteClient::Impl {
  explicit Impl(const std::string& url) : client(url) {}
  httplib::Client client;
};

RemoteClient::RemoteClient(std::string base_url) : impl_(std::make_unique<Impl>(base_url)) {
  impl_->client.set_connection_timeout(5);
  impl_->client.set_read_timeout(30);
}

RemoteClient::~RemoteClient() = default;

HttpResponse RemoteClient::send(const HttpRequest& req) {
  httplib::Headers headers;
  for (const auto& [k, v] : req.headers) headers.emplace(k, v);
  std::string target = req.path;
  if (!req.query.empty()) {
    httplib::Params params(req.query.begin(), req.query.end());
    target = httplib::append_query_params(target, params);
  }
  httplib::Result r = req.method == "GET"     ? impl_->client.Get(target, headers)
                      : req.method == "POST"  ? impl_->client.Post(target, headers, req.body, "application/json")
                      : req.method == "PATCH" ? impl_->client.Patch(target, headers, req.body, "application/json")
                                              : impl_->client.Delete(target, headers, req.body, "application/json");
  if (!r) throw Error(ErrorCode::ConfigInvalid, "cannot reach server: " + httplib::to_string(r.error()));
  return {r->status, r->get_header_value("Content-Type"), r->body};
}

ScenarioResult run_scenario(const Scenario& scenario, WireClient& client) {
  ScenarioResult result;
  std::map<std::string, std::string> session_of;
  std::map<std::string, std::int64_t> last_seen;
  std::map<std::string, std::string> last_code;
  static const std::regex code_re(R"(\*\d+\*(\d{6})#)");

  auto fail = [&](std::size_t index, std::string why) {
    result.passed = false;
    result.failed_step = index;
    result.failure = "step " + std::to_string(index) + ": " + why;
    result.transcript += "    FAIL " + why + "\n";
  };
  auto post = [&](const std::string& path, const Json& body) {
    return client.send(HttpRequest{"POST", path, {}, {{"content-type", "application/json"}}, body.dump()});
  };

  for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
    const auto& step = scenario.steps[i];
    const std::size_t n = i + 1;
    std::string payload = step.payload;
    if (auto pos = payload.find("{code}"); pos != std::string::npos) {
      auto code = last_code.find(step.actor);
      if (code == last_code.end()) {
        result.transcript += "[" + std::to_string(n) + "] " + step.actor + " " + action_name(step.action) + " " +
                             payload + "\n";
        fail(n, "no confirmation code has been sent to " + step.actor);
        break;
      }
      payload.replace(pos, 6, code->second);
    }
    result.transcript += "[" + std::to_string(n) + "] " + step.actor + " " + action_name(step.action) +
                         (step.shortcode ? " to " + *step.shortcode : std::string()) + " \"" + payload + "\"\n";

    HttpResponse resp;
    std::string observed;
    if (step.action == StepAction::Sms) {
      Json body;
      body["msisdn"] = step.actor;
      body["shortcode"] = *step.shortcode;
      body["text"] = payload;
      resp = post("/sim/sms", body);
      if (resp.status == 200) {
        auto j = resp.json();
        observed = j.value("routed_as", "") + " " + j.value("outcome", "");
        result.transcript += "    -> " + observed + "\n";
      }
    } else {
      Json body;
      body["msisdn"] = step.actor;
      if (step.action == StepAction::Input) {
        auto s = session_of.find(step.actor);
        body["session"] = s == session_of.end() ? std::string("none") : s->second;
      } else {
        body["session"] = nullptr;
      }
      body["text"] = payload;
      resp = post("/sim/ussd", body);
      if (resp.status == 200) {
        auto j = resp.json();
        observed = j.value("reply", "");
        bool more = j.value("continue", false);
        if (more) session_of[step.actor] = j.value("session", "");
        else session_of.erase(step.actor);
        result.transcript += indent(observed, more ? "    CON " : "    END ", "        ");
      }
    }
    if (resp.status != 200) {
      result.transcript += "    HTTP " + std::to_string(resp.status) + " " + resp.body + "\n";
      fail(n, "request failed with HTTP " + std::to_string(resp.status));
      break;
    }

    // messages that reached the actor's handset during this step
    auto inbox = client.send(HttpRequest{"GET", "/sim/inbox/" + step.actor, {}, {}, {}});
    std::vector<std::string> received;
    if (inbox.status == 200) {
      const auto listing = inbox.json();
      for (const auto& m : listing["messages"]) {
        auto id = m.value("id", std::int64_t{0});
        if (id <= last_seen[step.actor]) continue;
        last_seen[step.actor] = id;
        auto text = m.value("body", "");
        auto kind = m.value("kind", "");
        received.push_back(text);
        result.transcript += indent(text, "    SMS " + kind + " (" + std::to_string(m.value("segments", 0)) + " seg): ",
                                    "        ");
        std::smatch match;
        if (kind == "Ad" && std::regex_search(text, match, code_re)) last_code[step.actor] = match[1];
      }
    }

    if (step.expect && observed.find(*step.expect) == std::string::npos) {
      fail(n, "expected reply containing \"" + *step.expect + "\", got \"" + observed + "\"");
      break;
    }
    if (step.expect_sms) {
      bool found = false;
      for (const auto& r : received) found = found || r.find(*step.expect_sms) != std::string::npos;
      if (!found) {
        fail(n, "expected an SMS containing \"" + *step.expect_sms + "\", got " + std::to_string(received.size()) +
                    " new message(s)");
        break;
      }
    }
  }
  result.transcript += result.passed ? "RESULT PASS (" + std::to_string(scenario.steps.size()) + " steps)\n"
                                     : "RESULT FAIL " + result.failure + "\n";
  return result;
}

}  // namespace mservice

#include "mservice/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "mservice/error.hpp"

namespace mservice {

namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, key + ": " + why);
}

std::int64_t as_int(const std::string& key, const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t used = 0;
    try {
      auto n = std::stoll(s, &used);
      if (used == s.size()) return n;
    } catch (const std::exception&) {
    }
  }
  invalid(key, "expected an integer");
}

std::int64_t as_non_negative(const std::string& key, const json& v) {
  auto n = as_int(key, v);
  if (n < 0) invalid(key, "must not be negative");
  return n;
}

std::int64_t as_positive(const std::string& key, const json& v) {
  auto n = as_int(key, v);
  if (n <= 0) invalid(key, "must be positive");
  return n;
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) invalid(key, "expected a string");
  return v.get<std::string>();
}

std::string as_digits(const std::string& key, const json& v) {
  auto s = v.is_number_integer() ? std::to_string(v.get<std::int64_t>()) : as_string(key, v);
  if (s.empty()) invalid(key, "must not be empty");
  for (char c : s)
    if (c < '0' || c > '9') invalid(key, "must be digits only");
  return s;
}

bool as_bool(const std::string& key, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
  }
  invalid(key, "expected a boolean");
}

using Setter = void (*)(Config&, const std::string&, const json&);

struct KeySpec {
  const char* key;
  Setter set;
};

const KeySpec kKeys[] = {
    {"storage.path", [](Config& c, const std::string& k, const json& v) {
       c.storage_path = as_string(k, v);
       if (c.storage_path.empty()) invalid(k, "must not be empty");
     }},
    {"ussd.service_code", [](Config& c, const std::string& k, const json& v) { c.service_code = as_digits(k, v); }},
    {"ussd.page_size", [](Config& c, const std::string& k, const json& v) {
       auto n = as_positive(k, v);
       // options are single digits and 0/9 are navigation
       if (n > 8) invalid(k, "must be between 1 and 8");
       c.page_size = static_cast<std::size_t>(n);
     }},
    {"ussd.session_timeout_s", [](Config& c, const std::string& k, const json& v) {
       c.session_timeout = std::chrono::seconds(as_positive(k, v));
     }},
    {"ussd.reply_max_chars", [](Config& c, const std::string& k, const json& v) {
       auto n = as_positive(k, v);
       if (n < 100) invalid(k, "must be at least 100");
       c.reply_max_chars = static_cast<std::size_t>(n);
     }},
    {"ads.unit_price_tsh", [](Config& c, const std::string& k, const json& v) {
       c.ad_unit_price = Money(as_positive(k, v));
     }},
    {"ads.confirmation_ttl_s", [](Config& c, const std::string& k, const json& v) {
       c.confirmation_ttl = std::chrono::seconds(as_positive(k, v));
     }},
    {"ads.fallback_policy", [](Config& c, const std::string& k, const json& v) {
       auto s = as_string(k, v);
       if (s == "deny_with_paid_hint")
         c.fallback_policy = FallbackPolicy::DenyWithPaidHint;
       else if (s == "deliver_free")
         c.fallback_policy = FallbackPolicy::DeliverFree;
       else
         invalid(k, "expected deny_with_paid_hint or deliver_free");
     }},
    {"ads.max_body_chars", [](Config& c, const std::string& k, const json& v) {
       auto n = as_positive(k, v);
       if (n > 160) invalid(k, "must fit in one SMS segment");
       c.ad_max_chars = static_cast<std::size_t>(n);
     }},
    {"content.max_segments", [](Config& c, const std::string& k, const json& v) {
       c.content_max_segments = static_cast<std::size_t>(as_positive(k, v));
     }},
    {"content.delivery_mode", [](Config& c, const std::string& k, const json& v) {
       auto s = as_string(k, v);
       if (s == "separate" || s == "Separate")
         c.delivery_mode = DeliveryMode::Separate;
       else if (s == "combined" || s == "Combined")
         c.delivery_mode = DeliveryMode::Combined;
       else
         invalid(k, "expected separate or combined");
     }},
    {"content.allow_multiple_answers", [](Config& c, const std::string& k, const json& v) {
       c.allow_multiple_answers = as_bool(k, v);
     }},
    {"sms.unit_cost_tsh", [](Config& c, const std::string& k, const json& v) {
       c.sms_unit_cost = Money(as_non_negative(k, v));
     }},
    {"sms.registration_shortcode", [](Config& c, const std::string& k, const json& v) {
       c.registration_shortcode = as_digits(k, v);
     }},
    {"sms.question_shortcode", [](Config& c, const std::string& k, const json& v) {
       c.question_shortcode = as_digits(k, v);
     }},
    {"sms.registration_keyword", [](Config& c, const std::string& k, const json& v) {
       c.registration_keyword = as_string(k, v);
       if (c.registration_keyword.empty()) invalid(k, "must not be empty");
     }},
    {"sms.unsubscribe_keyword", [](Config& c, const std::string& k, const json& v) {
       c.unsubscribe_keyword = as_string(k, v);
       if (c.unsubscribe_keyword.empty()) invalid(k, "must not be empty");
     }},
    {"registration.fee_tsh", [](Config& c, const std::string& k, const json& v) {
       c.registration_fee = Money(as_non_negative(k, v));
     }},
    {"auth.token_ttl_s", [](Config& c, const std::string& k, const json& v) {
       c.token_ttl = std::chrono::seconds(as_positive(k, v));
     }},
    {"auth.pwhash_profile", [](Config& c, const std::string& k, const json& v) {
       auto s = as_string(k, v);
       if (s == "interactive")
         c.pwhash_profile = PwhashProfile::Interactive;
       else if (s == "minimal")
         c.pwhash_profile = PwhashProfile::Minimal;
       else
         invalid(k, "expected interactive or minimal");
     }},
    {"http.host", [](Config& c, const std::string& k, const json& v) { c.http_host = as_string(k, v); }},
    {"http.port", [](Config& c, const std::string& k, const json& v) {
       auto n = as_int(k, v);
       if (n < 0 || n > 65535) invalid(k, "must be a TCP port");
       c.http_port = static_cast<int>(n);
     }},
    {"http.static_dir", [](Config& c, const std::string& k, const json& v) { c.http_static_dir = as_string(k, v); }},
    {"random.seed", [](Config& c, const std::string& k, const json& v) {
       c.seed = static_cast<std::uint64_t>(as_non_negative(k, v));
     }},
};

const KeySpec* find_key(const std::string& key) {
  for (const auto& spec : kKeys)
    if (key == spec.key) return &spec;
  return nullptr;
}

void flatten(const json& node, const std::string& prefix, std::map<std::string, json>& out) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    return;
  }
  out[prefix] = node;
}

std::string env_name(std::string key) {
  std::string out = "MSERVICE_";
  for (char c : key) out += (c == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void apply_env(Config& config, const EnvLookup& env) {
  if (!env) return;
  for (const auto& spec : kKeys) {
    if (auto value = env(env_name(spec.key))) spec.set(config, spec.key, json(*value));
  }
}

}  // namespace

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

Config config_from_json(const json& doc, const EnvLookup& env) {
  if (!doc.is_object()) throw Error(ErrorCode::ConfigInvalid, "config root must be a JSON object");
  std::map<std::string, json> flat;
  flatten(doc, "", flat);
  Config config;
  for (const auto& [key, value] : flat) {
    const KeySpec* spec = find_key(key);
    if (!spec) invalid(key, "unknown key");
    spec->set(config, key, value);
  }
  apply_env(config, env);
  return config;
}

Config load_config(const std::filesystem::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
  return config_from_json(doc, env);
}

Config default_config(const EnvLookup& env) { return config_from_json(json::object(), env); }

void check_environment(const Config& config) {
  if (config.storage_path == ":memory:") return;
  std::filesystem::path p(config.storage_path);
  auto dir = p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    invalid("storage.path", "directory '" + dir.string() + "' does not exist");
}

}  // namespace mservice

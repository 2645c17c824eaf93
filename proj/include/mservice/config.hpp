#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"

#include "mservice/types.hpp"

namespace mservice {

enum class FallbackPolicy { DenyWithPaidHint, DeliverFree };
enum class DeliveryMode { Separate, Combined };
enum class PwhashProfile { Interactive, Minimal };

/// Every runtime knob. Keys in the config file are dotted paths
/// ("ads.unit_price_tsh"), nested as JSON objects; environment variables
/// MSERVICE_<PATH_WITH_UNDERSCORES> override the file.
struct Config {
  // storage
  std::string storage_path = ":memory:";

  // ussd
  std::string service_code = "31022";
  std::size_t page_size = 6;
  std::chrono::seconds session_timeout{90};
  std::size_t reply_max_chars = 160;

  // ads
  Money ad_unit_price{10};
  std::chrono::seconds confirmation_ttl{30 * 60};
  FallbackPolicy fallback_policy = FallbackPolicy::DenyWithPaidHint;
  std::size_t ad_max_chars = 120;

  // content
  std::size_t content_max_segments = 2;
  DeliveryMode delivery_mode = DeliveryMode::Separate;
  bool allow_multiple_answers = false;

  // sms
  Money sms_unit_cost{25};
  std::string registration_shortcode = "15050";
  std::string question_shortcode = "15051";
  std::string registration_keyword = "JIUNGE";
  std::string unsubscribe_keyword = "ACHA";

  // registration
  Money registration_fee{0};

  // auth
  std::chrono::seconds token_ttl{12 * 60 * 60};
  PwhashProfile pwhash_profile = PwhashProfile::Interactive;

  // http
  std::string http_host = "127.0.0.1";
  int http_port = 8080;
  std::string http_static_dir;

  // random; nullopt means draw a fresh seed at startup
  std::optional<std::uint64_t> seed;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Process environment lookup (std::getenv).
EnvLookup process_env();

/// Parses a config document. Unknown keys and bad values raise
/// Error(ConfigInvalid) whose detail names the offending key.
Config config_from_json(const nlohmann::json& doc, const EnvLookup& env = {});

/// Reads and parses a JSON config file, then applies environment overrides.
Config load_config(const std::filesystem::path& path, const EnvLookup& env = process_env());

/// Environment-only config (defaults plus MSERVICE_* overrides).
Config default_config(const EnvLookup& env = process_env());

/// Checks the things that depend on the environment rather than syntax,
/// e.g. that the storage directory exists.
void check_environment(const Config& config);

}  // namespace mservice

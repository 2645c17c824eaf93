#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "mservice/config.hpp"
#include "mservice/error.hpp"

using namespace mservice;
using nlohmann::json;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

std::string config_error(const json& doc, const EnvLookup& env = {}) {
  try {
    config_from_json(doc, env);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    return e.detail();
  }
  ADD_FAILURE() << "accepted " << doc.dump();
  return {};
}

}  // namespace

TEST(Config, Defaults) {
  auto c = config_from_json(json::object());
  EXPECT_EQ(c.service_code, "31022");
  EXPECT_EQ(c.page_size, 6u);
  EXPECT_EQ(c.session_timeout.count(), 90);
  EXPECT_EQ(c.reply_max_chars, 160u);
  EXPECT_EQ(c.ad_unit_price.tsh(), 10);
  EXPECT_EQ(c.confirmation_ttl.count(), 1800);
  EXPECT_EQ(c.fallback_policy, FallbackPolicy::DenyWithPaidHint);
  EXPECT_EQ(c.ad_max_chars, 120u);
  EXPECT_EQ(c.content_max_segments, 2u);
  EXPECT_EQ(c.delivery_mode, DeliveryMode::Separate);
  EXPECT_EQ(c.sms_unit_cost.tsh(), 25);
  EXPECT_EQ(c.registration_shortcode, "15050");
  EXPECT_EQ(c.question_shortcode, "15051");
  EXPECT_EQ(c.registration_keyword, "JIUNGE");
  EXPECT_EQ(c.registration_fee.tsh(), 0);
  EXPECT_EQ(c.token_ttl.count(), 12 * 3600);
  EXPECT_FALSE(c.seed.has_value());
}

TEST(Config, NestedKeys) {
  auto c = config_from_json(json::parse(R"({
    "ussd": {"service_code": "150", "page_size": 4},
    "ads": {"unit_price_tsh": 20, "fallback_policy": "deliver_free"},
    "content": {"delivery_mode": "combined"},
    "registration": {"fee_tsh": 250},
    "random": {"seed": 7}
  })"));
  EXPECT_EQ(c.service_code, "150");
  EXPECT_EQ(c.page_size, 4u);
  EXPECT_EQ(c.ad_unit_price.tsh(), 20);
  EXPECT_EQ(c.fallback_policy, FallbackPolicy::DeliverFree);
  EXPECT_EQ(c.delivery_mode, DeliveryMode::Combined);
  EXPECT_EQ(c.registration_fee.tsh(), 250);
  EXPECT_EQ(c.seed, 7u);
}

TEST(Config, UnknownKeyIsNamed) {
  auto detail = config_error(json::parse(R"({"ads": {"unit_prise_tsh": 10}})"));
  EXPECT_NE(detail.find("ads.unit_prise_tsh"), std::string::npos) << detail;
}

TEST(Config, BadValuesAreNamed) {
  EXPECT_NE(config_error(json::parse(R"({"ads": {"unit_price_tsh": -1}})")).find("ads.unit_price_tsh"),
            std::string::npos);
  EXPECT_NE(config_error(json::parse(R"({"ussd": {"service_code": "31a"}})")).find("ussd.service_code"),
            std::string::npos);
  EXPECT_NE(config_error(json::parse(R"({"ads": {"fallback_policy": "maybe"}})")).find("ads.fallback_policy"),
            std::string::npos);
  EXPECT_NE(config_error(json::parse(R"({"http": {"port": "eighty"}})")).find("http.port"), std::string::npos);
  EXPECT_NE(config_error(json::parse(R"({"ussd": {"page_size": 0}})")).find("ussd.page_size"), std::string::npos);
  EXPECT_FALSE(config_error(json::array()).empty());
}

TEST(Config, EnvironmentOverridesFile) {
  auto env = fake_env({{"MSERVICE_ADS_UNIT_PRICE_TSH", "15"}, {"MSERVICE_USSD_SERVICE_CODE", "150"}});
  auto c = config_from_json(json::parse(R"({"ads": {"unit_price_tsh": 20}})"), env);
  EXPECT_EQ(c.ad_unit_price.tsh(), 15);
  EXPECT_EQ(c.service_code, "150");
}

TEST(Config, BadEnvironmentValueNamesKey) {
  auto detail = config_error(json::object(), fake_env({{"MSERVICE_SMS_UNIT_COST_TSH", "lots"}}));
  EXPECT_NE(detail.find("sms.unit_cost_tsh"), std::string::npos) << detail;
}

TEST(Config, LoadFileAndMissingFile) {
  auto dir = std::filesystem::temp_directory_path() / "mservice_config_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "c.json";
  std::ofstream(path) << R"({"sms": {"unit_cost_tsh": 30}})";
  EXPECT_EQ(load_config(path, fake_env({})).sms_unit_cost.tsh(), 30);
  EXPECT_THROW(load_config(dir / "absent.json", fake_env({})), Error);
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_config(path, fake_env({})), Error);
  std::filesystem::remove_all(dir);
}

TEST(Config, StorageDirectoryMustExist) {
  Config c;
  c.storage_path = "/definitely/not/here/mservice.db";
  try {
    check_environment(c);
    FAIL() << "accepted a missing directory";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    EXPECT_NE(e.detail().find("storage.path"), std::string::npos);
  }
  c.storage_path = (std::filesystem::temp_directory_path() / "x.db").string();
  EXPECT_NO_THROW(check_environment(c));
  c.storage_path = ":memory:";
  EXPECT_NO_THROW(check_environment(c));
}

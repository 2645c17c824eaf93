#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mservice/clock.hpp"
#include "mservice/http_types.hpp"
#include "mservice/service.hpp"

namespace mservice {

enum class StepAction { Dial, Input, Sms };

/// One scripted handset action. `expect` is a substring the USSD reply (or,
/// for sms steps, "routed_as outcome") must contain; `expect_sms` a
/// substring some SMS received during the step must contain. Payloads may
/// use "{code}" for the newest confirmation code the actor was sent.
struct ScenarioStep {
  std::string actor;
  StepAction action = StepAction::Dial;
  std::string payload;
  std::optional<std::string> shortcode;
  std::optional<std::string> expect;
  std::optional<std::string> expect_sms;
};

struct Scenario {
  std::optional<std::filesystem::path> fixture;  // resolved against the script's directory
  std::vector<ScenarioStep> steps;
};

/// Throws Error(FixtureInvalid) naming the bad field, e.g. "steps[2].action".
Scenario parse_scenario(const Json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Sends wire requests somewhere: into an in-process Service, or to a
/// running server over HTTP.
class WireClient {
 public:
  virtual ~WireClient() = default;
  virtual HttpResponse send(const HttpRequest& req) = 0;
};

/// In-process client. When a manual clock is given it advances one second
/// before every request, so embedded runs have reproducible timestamps.
class EmbeddedClient final : public WireClient {
 public:
  EmbeddedClient(Service& service, ManualClock* clock);
  HttpResponse send(const HttpRequest& req) override;

 private:
  Service& service_;
  ManualClock* clock_;
};

/// HTTP client for "http://host:port".
class RemoteClient final : public WireClient {
 public:
  explicit RemoteClient(std::string base_url);
  ~RemoteClient() override;
  HttpResponse send(const HttpRequest& req) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ScenarioResult {
  std::string transcript;
  bool passed = true;
  std::optional<std::size_t> failed_step;  // 1-based
  std::string failure;
};

/// Runs the steps in order and stops at the first failed expectation.
ScenarioResult run_scenario(const Scenario& scenario, WireClient& client);

/// Start time used by embedded simulations.
Timestamp simulation_epoch();

}  // namespace mservice

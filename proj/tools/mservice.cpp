// mservice: serve | seed | simulate | report
//
// Exit codes: 0 ok, 1 expectation or validation failure, 2 config or
// environment failure.

#include <csignal>
#include <pthread.h>

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"

#include "mservice/fixture.hpp"
#include "mservice/http_server.hpp"
#include "mservice/scenario.hpp"
#include "mservice/service.hpp"

using namespace mservice;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kEnvironment = 2;

Config read_config(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

int report_error(const Error& e) {
  std::cerr << "mservice: " << to_string(e.code());
  if (!e.detail().empty()) std::cerr << ": " << e.detail();
  std::cerr << "\n";
  switch (e.code()) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::PortInUse:
    case ErrorCode::StorageFailure: return kEnvironment;
    default: return kFailed;
  }
}

int cmd_serve(const std::string& config_path, const std::string& fixture) {
  auto config = read_config(config_path);
  check_environment(config);

  // Block the shutdown signals before any thread starts so every thread
  // inherits the mask and only sigwait below sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(config);
  if (!fixture.empty()) std::cout << format_summary(apply_fixture(service, load_fixture(fixture)));
  HttpServer server(service, config.http_host, config.http_port, config.http_static_dir);
  server.start();
  std::cout << "listening on http://" << config.http_host << ":" << server.port() << std::endl;

  std::mutex m;
  std::condition_variable cv;
  bool stopping = false;
  std::thread sweeper([&] {
    std::unique_lock lock(m);
    while (!cv.wait_for(lock, std::chrono::seconds(5), [&] { return stopping; })) {
      try {
        service.sweep();
      } catch (const std::exception& e) {
        std::cerr << "mservice: sweep failed: " << e.what() << "\n";
      }
    }
  });

  int sig = 0;
  sigwait(&signals, &sig);
  std::cout << "received signal " << sig << ", shutting down" << std::endl;
  server.stop();
  {
    std::lock_guard lock(m);
    stopping = true;
  }
  cv.notify_all();
  sweeper.join();
  service.sweep();
  return kOk;
}

int cmd_seed(const std::string& fixture, const std::string& config_path) {
  auto config = read_config(config_path);
  check_environment(config);
  Service service(config);
  std::cout << format_summary(apply_fixture(service, load_fixture(fixture)));
  return kOk;
}

int cmd_simulate(const std::string& script_path, std::uint64_t seed, const std::string& fixture,
                 const std::string& url, const std::string& config_path) {
  auto scenario = load_scenario(script_path);
  if (!fixture.empty()) scenario.fixture = fixture;

  ScenarioResult result;
  if (!url.empty()) {
    RemoteClient client(url);
    result = run_scenario(scenario, client);
  } else {
    auto config = read_config(config_path);
    // embedded runs always start from an empty private store
    config.storage_path = ":memory:";
    config.seed = seed;
    auto clock = std::make_shared<ManualClock>(simulation_epoch());
    Service service(config, clock);
    if (scenario.fixture) apply_fixture(service, load_fixture(*scenario.fixture));
    EmbeddedClient client(service, clock.get());
    result = run_scenario(scenario, client);
  }
  std::cout << result.transcript << std::flush;
  if (!result.passed) {
    std::cerr << "mservice: ExpectationFailed: " << result.failure << "\n";
    return kFailed;
  }
  return kOk;
}

int cmd_report(const std::string& from, const std::string& to, const std::string& config_path, bool as_json) {
  auto config = read_config(config_path);
  check_environment(config);
  Period period;
  if (!from.empty()) {
    period.from = parse_timestamp(from);
    if (!period.from) throw Error(ErrorCode::BadRequest, "--from: expected unix seconds or ISO-8601 UTC");
  }
  if (!to.empty()) {
    period.to = parse_timestamp(to);
    if (!period.to) throw Error(ErrorCode::BadRequest, "--to: expected unix seconds or ISO-8601 UTC");
  }
  Service service(config);
  auto impressions = service.ledger().impression_report(period);
  auto costs = service.outbox().cost_report(period);

  if (as_json) {
    Json out;
    Json rows = Json::array();
    for (const auto& r : impressions) {
      Json j;
      j["sponsor"] = r.sponsor.value;
      j["name"] = r.name;
      j["impressions"] = r.impressions;
      j["spend"] = r.spend.tsh();
      j["deposits"] = r.deposits.tsh();
      j["remaining"] = r.remaining.tsh();
      rows.push_back(j);
    }
    out["impressions"] = rows;
    out["sms_costs"] = to_json(costs);
    std::cout << out.dump(2) << "\n";
    return kOk;
  }

  std::printf("%-6s %-32s %11s %10s %10s %10s\n", "id", "sponsor", "impressions", "spend", "deposits", "remaining");
  for (const auto& r : impressions)
    std::printf("%-6lld %-32s %11zu %10lld %10lld %10lld\n", static_cast<long long>(r.sponsor.value), r.name.c_str(),
                r.impressions, static_cast<long long>(r.spend.tsh()), static_cast<long long>(r.deposits.tsh()),
                static_cast<long long>(r.remaining.tsh()));
  std::printf("\n%-8s %8s %10s %10s\n", "kind", "sms", "segments", "cost");
  for (const auto& [kind, t] : costs.by_kind)
    std::printf("%-8s %8zu %10zu %10lld\n", std::string(to_string(kind)).c_str(), t.sms, t.segments,
                static_cast<long long>(t.cost.tsh()));
  std::printf("%-8s %8zu %10zu %10lld\n", "total", costs.total_sms, costs.total_segments,
              static_cast<long long>(costs.total_cost.tsh()));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sponsored SMS/USSD maternal health information service"};
  app.require_subcommand(1);

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string serve_fixture;
  serve->add_option("--config", config_path, "JSON config file");
  serve->add_option("--fixture", serve_fixture, "Seed this fixture before listening");

  auto* seed = app.add_subcommand("seed", "Upsert a fixture into the configured store");
  std::string fixture;
  seed->add_option("fixture", fixture, "Fixture JSON file")->required();
  seed->add_option("--config", config_path, "JSON config file");

  auto* simulate = app.add_subcommand("simulate", "Run a scenario script and print the transcript");
  std::string script;
  std::uint64_t sim_seed = 1;
  std::string sim_fixture, url;
  simulate->add_option("script", script, "Scenario JSON file")->required();
  simulate->add_option("--seed", sim_seed, "Random seed for the embedded service");
  simulate->add_option("--fixture", sim_fixture, "Fixture to seed (overrides the script's)");
  simulate->add_option("--url", url, "Run against a live server, e.g. http://127.0.0.1:8080");
  simulate->add_option("--config", config_path, "JSON config file");

  auto* report = app.add_subcommand("report", "Print impression and SMS cost reports");
  std::string from, to;
  bool as_json = false;
  report->add_option("--from", from, "Start (unix seconds or ISO-8601 UTC), inclusive");
  report->add_option("--to", to, "End (unix seconds or ISO-8601 UTC), exclusive");
  report->add_option("--config", config_path, "JSON config file");
  report->add_flag("--json", as_json, "Emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kEnvironment;
  }

  try {
    if (*serve) return cmd_serve(config_path, serve_fixture);
    if (*seed) return cmd_seed(fixture, config_path);
    if (*simulate) return cmd_simulate(script, sim_seed, sim_fixture, url, config_path);
    if (*report) return cmd_report(from, to, config_path, as_json);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "mservice: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}

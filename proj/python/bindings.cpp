#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "mservice/fixture.hpp"
#include "mservice/scenario.hpp"
#include "mservice/service.hpp"
#include "mservice/ussd.hpp"

namespace py = pybind11;
using namespace mservice;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_python(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

// Service on a manual clock, so Python callers control time.
class PyService {
 public:
  PyService(const py::object& config, std::uint64_t seed)
      : clock_(std::make_shared<ManualClock>(simulation_epoch())) {
    Json doc = config.is_none() ? Json::object() : from_python(config);
    auto cfg = config_from_json(nlohmann::json::parse(doc.dump()));
    cfg.seed = seed;
    service_ = std::make_unique<Service>(std::move(cfg), clock_);
  }

  py::tuple handle(const std::string& method, const std::string& path, const std::string& body,
                   const std::map<std::string, std::string>& headers,
                   const std::map<std::string, std::string>& query) {
    HttpRequest req{method, path, query, {}, body};
    for (const auto& [k, v] : headers) {
      std::string key = k;
      for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      req.headers.emplace(key, v);
    }
    auto r = service_->handle(req);
    return py::make_tuple(r.status, r.body);
  }

  py::dict ussd(const std::string& msisdn, const std::string& text, const std::optional<std::string>& session) {
    auto r = service_->gateway().ussd_request(msisdn, session.value_or(""), text);
    py::dict d;
    d["reply"] = r.reply.text;
    d["continue"] = r.reply.disposition == Disposition::Continue;
    d["session"] = r.reply.session_id;
    d["error"] = r.error ? py::cast(std::string(to_string(*r.error))) : py::none();
    return d;
  }

  py::dict sms(const std::string& msisdn, const std::string& shortcode, const std::string& text) {
    auto r = service_->gateway().receive_sms(msisdn, shortcode, text);
    py::dict d;
    d["routed_as"] = std::string(to_string(r.routed_as));
    d["outcome"] = r.outcome;
    return d;
  }

  py::list inbox(const std::string& msisdn) {
    py::list out;
    for (const auto& d : service_->outbox().inbox(Msisdn::parse(msisdn))) out.append(to_python(to_json(d)));
    return out;
  }

  py::dict seed_fixture(const py::object& fixture) {
    Json doc = py::isinstance<py::str>(fixture) ? load_fixture(fixture.cast<std::string>()) : from_python(fixture);
    py::dict out;
    for (const auto& [name, c] : apply_fixture(*service_, doc)) {
      py::dict row;
      row["total"] = c.total;
      row["created"] = c.created;
      row["updated"] = c.updated;
      out[py::str(name)] = row;
    }
    return out;
  }

  std::int64_t deposit(std::int64_t sponsor, std::int64_t amount) {
    if (amount < 0) throw Error(ErrorCode::NonPositiveAmount, std::to_string(amount));
    return service_->ledger().deposit(SponsorId(sponsor), Money(amount)).tsh();
  }

  bool ads_exist() const { return service_->ledger().ads_exist(); }
  py::object dashboard() const { return to_python(service_->admin().dashboard()); }
  py::object sms_costs() const { return to_python(to_json(service_->outbox().cost_report())); }
  std::string login(const std::string& username, const std::string& password) {
    return service_->admin().login(username, password).token;
  }
  void advance(std::int64_t seconds) { clock_->advance(std::chrono::seconds(seconds)); }
  std::string now() const { return to_iso8601(clock_->now()); }
  std::size_t sweep() {
    auto c = service_->sweep();
    return c.sessions + c.confirmations + c.tokens;
  }

 private:
  std::shared_ptr<ManualClock> clock_;
  std::unique_ptr<Service> service_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sponsored SMS/USSD maternal health service core";

  static py::exception<Error> error_type(m, "MServiceError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      auto args = py::make_tuple(std::string(to_string(e.code())), e.detail());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  m.def(
      "validate_msisdn", [](const std::string& raw) { return validate_msisdn(raw).value(); }, py::arg("raw"),
      "Canonical digits of a phone number; raises MServiceError('MalformedMsisdn', ...).");
  m.def(
      "parse_ussd_code",
      [](const std::string& raw) {
        auto c = parse_ussd_code(raw);
        return py::make_tuple(c.service, c.args);
      },
      py::arg("raw"), "Split '*service*arg#' into (service, [args]).");
  m.def(
      "segment_message",
      [](const std::string& text) {
        std::vector<std::string> parts;
        for (auto& s : mservice::segment_message(text)) parts.push_back(std::move(s.text));
        return parts;
      },
      py::arg("text"), "160-character SMS segments.");
  m.def("is_gsm_basic", &is_gsm_basic, py::arg("text"));

  py::class_<PyService>(m, "Service")
      .def(py::init<const py::object&, std::uint64_t>(), py::arg("config") = py::none(), py::arg("seed") = 1)
      .def("handle", &PyService::handle, py::arg("method"), py::arg("path"), py::arg("body") = "",
           py::arg("headers") = std::map<std::string, std::string>{},
           py::arg("query") = std::map<std::string, std::string>{})
      .def("ussd", &PyService::ussd, py::arg("msisdn"), py::arg("text"), py::arg("session") = py::none())
      .def("sms", &PyService::sms, py::arg("msisdn"), py::arg("shortcode"), py::arg("text"))
      .def("inbox", &PyService::inbox, py::arg("msisdn"))
      .def("seed", &PyService::seed_fixture, py::arg("fixture"))
      .def("deposit", &PyService::deposit, py::arg("sponsor"), py::arg("amount"))
      .def("ads_exist", &PyService::ads_exist)
      .def("dashboard", &PyService::dashboard)
      .def("sms_costs", &PyService::sms_costs)
      .def("login", &PyService::login, py::arg("username"), py::arg("password"))
      .def("advance", &PyService::advance, py::arg("seconds"))
      .def("now", &PyService::now)
      .def("sweep", &PyService::sweep);
}

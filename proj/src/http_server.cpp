#include "mservice/http_server.hpp"

#include <algorithm>
#include <cctype>

#include "httplib.h"

namespace mservice {

namespace {

HttpRequest translate(const httplib::Request& in) {
  HttpRequest out;
  out.method = in.method;
  out.path = in.path;
  out.body = in.body;
  for (const auto& [k, v] : in.params) out.query.emplace(k, v);
  for (const auto& [k, v] : in.headers) {
    std::string key = k;
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    out.headers.emplace(std::move(key), v);
  }
  return out;
}

}  // namespace

HttpServer::HttpServer(Service& service, std::string host, int port, std::string static_dir)
    : service_(service), host_(std::move(host)), port_(port), static_dir_(std::move(static_dir)) {}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start() {
  server_ = std::make_unique<httplib::Server>();
  // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which
  // would let a second instance share the port silently
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    auto r = service_.handle(translate(req));
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
  server_->Patch(".*", handler);
  server_->Delete(".*", handler);
  server_->Put(".*", handler);
  if (!static_dir_.empty() && !server_->set_mount_point("/", static_dir_))
    throw Error(ErrorCode::ConfigInvalid, "http.static_dir: '" + static_dir_ + "' is not a directory");

  if (port_ == 0) {
    bound_port_ = server_->bind_to_any_port(host_);
    if (bound_port_ <= 0) throw Error(ErrorCode::PortInUse, host_ + ":0");
  } else {
    if (!server_->bind_to_port(host_, port_))
      throw Error(ErrorCode::PortInUse, host_ + ":" + std::to_string(port_));
    bound_port_ = port_;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

bool HttpServer::running() const { return server_ && server_->is_running(); }

}  // namespace mservice

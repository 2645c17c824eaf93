#pragma once

#include <memory>
#include <string>
#include <thread>

#include "mservice/service.hpp"

namespace httplib {
class Server;
}

namespace mservice {

/// cpp-httplib frontend for a Service. Every request is translated into an
/// HttpRequest and answered by Service::handle; a static directory, when
/// given, is mounted at "/".
class HttpServer {
 public:
  HttpServer(Service& service, std::string host, int port, std::string static_dir = {});
  ~HttpServer();

  /// Binds and starts serving on a background thread. Port 0 picks a free
  /// port. Throws Error(PortInUse) when the address can't be bound.
  void start();
  void stop();

  [[nodiscard]] int port() const noexcept { return bound_port_; }
  [[nodiscard]] bool running() const;

 private:
  Service& service_;
  std::string host_;
  int port_;
  std::string static_dir_;
  int bound_port_ = 0;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace mservice

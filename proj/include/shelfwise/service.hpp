#pragma once

#include <memory>
#include <optional>
#include <string>

#include "shelfwise/app.hpp"
#include "shelfwise/eventlog.hpp"

namespace shelfwise {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::string> cors_origin;
  std::size_t simulation_workers = 2;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

// HTTP front end over one immutable event log. Results are memoised per
// (endpoint, canonical request body); the cache never outlives the log.
class Service {
 public:
  Service(std::optional<EventLog> log, ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Transport-independent dispatch used by the socket handlers.
  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::string& body) const;

  // Binds the listening socket; returns false when the address is taken.
  bool bind();
  int port() const;
  // Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace shelfwise

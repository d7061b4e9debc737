#pragma once

#include <memory>
#include <string>

#include "langnav/service.hpp"

namespace langnav {

// JSON-over-HTTP front end for a SessionManager. Snapshots are pushed as
// server-sent events on GET /sessions/{id}/stream.
class HttpServer {
 public:
  explicit HttpServer(SessionManager& sessions);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // port 0 picks a free port; returns the bound port. Throws Error(Io).
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// LANGNAV_BIND / LANGNAV_PORT, falling back to the given defaults.
std::string bind_address_from_env(const std::string& fallback);
int port_from_env(int fallback);

}  // namespace langnav

#pragma once

#include <memory>
#include <string>

#include "dyscreen/service/model_registry.hpp"
#include "dyscreen/service/screening_service.hpp"

namespace dyscreen::service {

struct HttpOptions {
  std::string api_token;  ///< empty disables the Authorization check
};

/// JSON API under /v1. Errors are {code, message, details}.
class HttpServer {
 public:
  HttpServer(ScreeningService& sessions, ModelRegistry& models, HttpOptions options = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or throws.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dyscreen::service

#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace dyscreen::service {

/// Request-level failure with the HTTP status and error code it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message, nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), status_(status), code_(std::move(code)), details_(std::move(details)) {}

  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  int status_;
  std::string code_;
  nlohmann::json details_;
};

}  // namespace dyscreen::service

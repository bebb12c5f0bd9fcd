#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyscreen {

/// Bad input data: malformed CSV/JSON rows, invariant violations, shape mismatches.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
  DataError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  /// 1-based source line, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Model artifact cannot be decoded (bad version tag, truncated payload, bad shape).
class ModelFormatError : public DataError {
 public:
  using DataError::DataError;
};

/// Session event stream breaks an ordering or bracketing rule.
class MalformedSessionError : public DataError {
 public:
  using DataError::DataError;
};

/// Session lacks QuestionStart/QuestionEnd brackets for some variant questions.
class IncompleteSessionError : public DataError {
 public:
  IncompleteSessionError(const std::string& what, std::vector<int> missing)
      : DataError(what), missing_(std::move(missing)) {}
  const std::vector<int>& missing_qids() const noexcept { return missing_; }

 private:
  std::vector<int> missing_;
};

}  // namespace dyscreen

#pragma once

#include <stdexcept>
#include <string>

namespace rationeval {

// Exit codes used by the CLI. Library code throws the matching exception
// type; main() translates.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitEndpoint = 4,
  kExitInternal = 5,
};

class Error : public std::runtime_error {
 public:
  Error(std::string msg, int code) : std::runtime_error(std::move(msg)), code_(code) {}
  int exit_code() const { return code_; }

 private:
  int code_;
};

// Bad or missing configuration (files, flags, schema).
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string msg) : Error(std::move(msg), kExitConfig) {}
};

// Malformed or inconsistent data: dataset records, judge responses,
// out-of-range scores, missing stage artifacts.
class DataError : public Error {
 public:
  explicit DataError(std::string msg) : Error(std::move(msg), kExitData) {}
};

// Judge endpoint failures: transport, exhausted retries, bad status.
// retryable marks transient conditions (429, 5xx, transport) that the
// caller may back off and retry.
class EndpointError : public Error {
 public:
  explicit EndpointError(std::string msg, bool retryable = false)
      : Error(std::move(msg), kExitEndpoint), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

// A violated internal invariant; always a bug.
class InternalError : public Error {
 public:
  explicit InternalError(std::string msg) : Error(std::move(msg), kExitInternal) {}
};

}  // namespace rationeval

#pragma once

#include <stdexcept>
#include <string>

namespace graphdiff {

// Machine-readable failure categories. The CLI maps these to exit codes
// and prints them on stderr as "ERROR <category>: <message>".
enum class ErrorCategory {
  usage,             // bad command line
  io,                // file missing / unreadable / unwritable
  parse,             // malformed input file
  config,            // invalid configuration value
  invalid_argument,  // rejected operation input (shape/size/range)
  unsupported_size,  // exact-mode size guard tripped
  diverged,          // non-finite state during training or sampling
  internal,          // should-not-happen
};

inline const char* error_category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::config: return "config";
    case ErrorCategory::invalid_argument: return "invalid_argument";
    case ErrorCategory::unsupported_size: return "unsupported_size";
    case ErrorCategory::diverged: return "diverged";
    case ErrorCategory::internal: return "internal";
  }
  return "internal";
}

inline int error_exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::parse: return 4;
    case ErrorCategory::config: return 5;
    case ErrorCategory::invalid_argument: return 6;
    case ErrorCategory::unsupported_size: return 7;
    case ErrorCategory::diverged: return 8;
    case ErrorCategory::internal: return 9;
  }
  return 9;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }
  const char* category_name() const { return error_category_name(category_); }
  int exit_code() const { return error_exit_code(category_); }

 private:
  ErrorCategory category_;
};

inline void require(bool cond, ErrorCategory category, const std::string& message) {
  if (!cond) throw Error(category, message);
}

}  // namespace graphdiff

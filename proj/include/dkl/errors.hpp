#pragma once

#include <stdexcept>
#include <string>

namespace dkl {

/// Broad classes of failure. The CLI maps these onto exit codes.
enum class ErrorKind {
  domain,        // argument outside the mathematical domain
  out_of_range,  // argument beyond a table or resource limit
  arithmetic,    // count type overflow
  unsupported,   // valid request we do not implement (k too large, method)
  validation,    // internal cross-check failed
  insufficient,  // not enough samples / data points
  resource,      // memory budget or file system
  corruption,    // cache file failed integrity checks
  config         // malformed experiment configuration
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::arithmetic: return "arithmetic";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::validation: return "validation";
    case ErrorKind::insufficient: return "insufficient";
    case ErrorKind::resource: return "resource";
    case ErrorKind::corruption: return "corruption";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace dkl

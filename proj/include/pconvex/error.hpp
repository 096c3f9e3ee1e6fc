#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pconvex {

enum class ErrorKind {
  domain,
  overflow,
  convergence,
  bracket,
  construction,
  order,
  monotonicity,
  support_violation,
  moment_infinite,
  unbounded_support,
  domain_mismatch,
  degenerate,
  certificate,  // a bound was requested with a failing or mismatched certificate
  input,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::domain: return "domain-error";
    case ErrorKind::overflow: return "overflow-error";
    case ErrorKind::convergence: return "convergence-error";
    case ErrorKind::bracket: return "bracket-error";
    case ErrorKind::construction: return "construction-error";
    case ErrorKind::order: return "order-error";
    case ErrorKind::monotonicity: return "monotonicity-error";
    case ErrorKind::support_violation: return "support-violation";
    case ErrorKind::moment_infinite: return "moment-infinite";
    case ErrorKind::unbounded_support: return "unbounded-support-error";
    case ErrorKind::domain_mismatch: return "domain-mismatch";
    case ErrorKind::degenerate: return "degenerate-error";
    case ErrorKind::certificate: return "certificate-error";
    case ErrorKind::input: return "input-error";
  }
  return "error";
}

/// Single exception type for the library; `kind()` discriminates.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  /// Convergence failures carry the best estimate reached.
  Error(ErrorKind kind, const std::string& what, double best_estimate)
      : Error(kind, what) {
    best_ = best_estimate;
  }

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }
  std::optional<double> best_estimate() const noexcept { return best_; }

 private:
  ErrorKind kind_;
  std::string message_;
  std::optional<double> best_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace pconvex

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kdl {

enum class ErrorKind {
  InvalidArgument,
  DegenerateDegree,
  DegenerateReciprocal,
  InvalidBound,
  NonConvergence,
  DoubleRoot,
  CircleRoot,
  GridCollision,
  SingularCase,
  TypeError,
  OracleCap,
  Domain,
  Accuracy,
  EmptyInput,
  ExperimentIntegrity,
  Io,
  Usage,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the CLI, the experiment harness) can map it to a policy.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Root finder failure; carries the worst residual seen.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double worst_residual)
      : Error(ErrorKind::NonConvergence, what), worst_residual_(worst_residual) {}

  double worst_residual() const noexcept { return worst_residual_; }

 private:
  double worst_residual_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::DegenerateDegree: return "degenerate degree";
    case ErrorKind::DegenerateReciprocal: return "degenerate reciprocal";
    case ErrorKind::InvalidBound: return "invalid bound";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::DoubleRoot: return "double root";
    case ErrorKind::CircleRoot: return "root on unit circle";
    case ErrorKind::GridCollision: return "grid collision";
    case ErrorKind::SingularCase: return "singular case";
    case ErrorKind::TypeError: return "type error";
    case ErrorKind::OracleCap: return "oracle cap exceeded";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Accuracy: return "accuracy not reached";
    case ErrorKind::EmptyInput: return "empty input";
    case ErrorKind::ExperimentIntegrity: return "experiment integrity";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Usage: return "usage error";
  }
  return "unknown";
}

}  // namespace kdl

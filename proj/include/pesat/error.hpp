#pragma once

#include <stdexcept>
#include <string>

namespace pesat {

enum class ErrorKind {
  NonPeriodicAntiderivative,
  ParityViolation,
  RoleViolation,
  PreconditionViolation,
  ShapeViolation,
  StepUnstable,
  BudgetExceeded,
  NotInSpan,
  IndexOutOfRange,
  DegenerateFit,
  ConfigError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPeriodicAntiderivative: return "NonPeriodicAntiderivative";
    case ErrorKind::ParityViolation: return "ParityViolation";
    case ErrorKind::RoleViolation: return "RoleViolation";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::ShapeViolation: return "ShapeViolation";
    case ErrorKind::StepUnstable: return "StepUnstable";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NotInSpan: return "NotInSpan";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

#define PESAT_DEMAND(cond, kind, msg)          \
  do {                                         \
    if (!(cond)) throw ::pesat::Error(kind, msg); \
  } while (0)

}  // namespace pesat

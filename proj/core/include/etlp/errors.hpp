#pragma once

#include <stdexcept>
#include <string>

namespace etlp {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent vector/matrix dimensions; the message names the offending field.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented operation precondition was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The active-set constancy precondition of the directional-derivative bound
/// does not hold at the queried point ("mode-precondition").
class ModePreconditionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Invalid trigger parameters (see validate_config for the individual bounds).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class OracleFailure { kInfeasible, kUnbounded, kSizeLimit };

/// Raised by the reference solvers. what() is one of "infeasible",
/// "unbounded", "oracle-size-limit", optionally followed by detail.
class OracleError : public Error {
 public:
  OracleError(OracleFailure kind, const std::string& detail = "")
      : Error(code(kind) + (detail.empty() ? "" : ": " + detail)), kind_(kind) {}

  OracleFailure kind() const { return kind_; }

  static std::string code(OracleFailure kind) {
    switch (kind) {
      case OracleFailure::kInfeasible: return "infeasible";
      case OracleFailure::kUnbounded: return "unbounded";
      case OracleFailure::kSizeLimit: return "oracle-size-limit";
    }
    return "unknown";
  }

 private:
  OracleFailure kind_;
};

}  // namespace etlp

#pragma once

#include <stdexcept>
#include <string>

namespace kerrnoise {

enum class ErrorKind {
  invalid_argument,
  dimension_too_small,
  numerical_failure,
  non_convergence,
  oracle_mismatch,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::dimension_too_small: return "dimension_too_small";
    case ErrorKind::numerical_failure: return "numerical_failure";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::oracle_mismatch: return "oracle_mismatch";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::invalid_argument, what) {}
};

class DimensionTooSmall : public Error {
 public:
  explicit DimensionTooSmall(const std::string& what)
      : Error(ErrorKind::dimension_too_small, what) {}
};

class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& what)
      : Error(ErrorKind::numerical_failure, what) {}
};

class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& what)
      : Error(ErrorKind::non_convergence, what) {}
};

class OracleMismatch : public Error {
 public:
  explicit OracleMismatch(const std::string& what)
      : Error(ErrorKind::oracle_mismatch, what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace kerrnoise

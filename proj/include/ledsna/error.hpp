#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ledsna {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (PPM, PGM, JSON label map, dependency groups).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The SVR solver hit its iteration cap before every KKT violation dropped
/// below tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double max_violation)
      : Error(what), max_violation_(max_violation) {}
  double max_violation() const noexcept { return max_violation_; }

 private:
  double max_violation_;
};

/// Failure while querying a classifier.
class BlackBoxError : public Error {
 public:
  enum class Kind { kTransport, kMalformedResponse, kOutOfRange };

  BlackBoxError(Kind kind, const std::string& what, std::size_t batch_index = 0)
      : Error(what), kind_(kind), batch_index_(batch_index) {}

  Kind kind() const noexcept { return kind_; }
  /// Index of the batch (within one pipeline run) that failed.
  std::size_t batch_index() const noexcept { return batch_index_; }

 private:
  Kind kind_;
  std::size_t batch_index_;
};

inline const char* to_string(BlackBoxError::Kind kind) {
  switch (kind) {
    case BlackBoxError::Kind::kTransport:
      return "transport";
    case BlackBoxError::Kind::kMalformedResponse:
      return "malformed-response";
    case BlackBoxError::Kind::kOutOfRange:
      return "out-of-range";
  }
  return "unknown";
}

}  // namespace ledsna

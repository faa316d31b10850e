#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace cgp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Failure categories raised by the library. Solver outcomes such as an
/// infeasible QP are reported through status fields instead.
enum class ErrorKind {
  ConditioningFailure,
  DuplicateKnot,
  OutOfDomain,
  DimensionMismatch,
  NotPositiveDefinite,
  DataCollision,
  InfeasiblePolytope,
  StallDetected,
  EmptyBatch,
  InvalidArgument,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConditioningFailure: return "ConditioningFailure";
    case ErrorKind::DuplicateKnot: return "DuplicateKnot";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DataCollision: return "DataCollision";
    case ErrorKind::InfeasiblePolytope: return "InfeasiblePolytope";
    case ErrorKind::StallDetected: return "StallDetected";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

inline void require_dims(Index got, Index expected, const char* what) {
  if (got != expected) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": got " + std::to_string(got) +
                                                  ", expected " + std::to_string(expected));
  }
}

}  // namespace cgp

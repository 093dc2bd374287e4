#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curvegroups {

// Mirrors cg_status in curvegroups.h; keep the numeric values in sync.
enum class ErrorCode {
  InvalidArgument = 1,
  DuplicateCurveId = 2,
  EmptyCurve = 3,
  NonFiniteValue = 4,
  DegenerateFit = 5,
  AllCandidatesDegenerate = 6,
  EmptyClusterUnrecoverable = 7,
  TooLarge = 8,
  NegativeVariance = 9,
  OriginPoint = 10,
  ParseError = 11,
  IoError = 12,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when a local linear fit has fewer than two distinct covariate
/// values with positive kernel weight at the evaluation point.
class DegenerateFitError : public Error {
 public:
  DegenerateFitError(double x, const std::string& context)
      : Error(ErrorCode::DegenerateFit, context), x_(x) {}

  double location() const noexcept { return x_; }

 private:
  double x_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::ParseError, message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace curvegroups

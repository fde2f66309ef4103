#pragma once

#include <stdexcept>
#include <string>

namespace lmcf {

enum class ErrorCode {
  DegenerateEdge,
  InvalidCurve,
  NotExact,
  BadFrame,
  InvalidArgument,
  StabilityViolation,
  SingularCollapse,
  RangeError,
  TimeGridMismatch,
  WindowInPast,
  GrowthUnbounded,
  DegenerateFit,
  BoundaryTooTight,
  EqualAngles,
  IllConditionedGram,
  SolverFailure,
  ComponentAmbiguity,
  NoTransverseRadius,
  CurvesTooClose,
  RoundingAmbiguity,
  ConfigInvalid,
  SchemaMismatch,
  UnknownFixture,
  IoError,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised for closed components whose Liouville holonomy does not vanish.
class NotExactError : public Error {
 public:
  NotExactError(int component, double holonomy);
  int component() const noexcept { return component_; }
  double holonomy() const noexcept { return holonomy_; }

 private:
  int component_;
  double holonomy_;
};

}  // namespace lmcf

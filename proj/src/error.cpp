#include "lmcf/error.hpp"

#include <cstdio>

namespace lmcf {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateEdge: return "DegenerateEdge";
    case ErrorCode::InvalidCurve: return "InvalidCurve";
    case ErrorCode::NotExact: return "NotExact";
    case ErrorCode::BadFrame: return "BadFrame";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::StabilityViolation: return "StabilityViolation";
    case ErrorCode::SingularCollapse: return "SingularCollapse";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::TimeGridMismatch: return "TimeGridMismatch";
    case ErrorCode::WindowInPast: return "WindowInPast";
    case ErrorCode::GrowthUnbounded: return "GrowthUnbounded";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::BoundaryTooTight: return "BoundaryTooTight";
    case ErrorCode::EqualAngles: return "EqualAngles";
    case ErrorCode::IllConditionedGram: return "IllConditionedGram";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::ComponentAmbiguity: return "ComponentAmbiguity";
    case ErrorCode::NoTransverseRadius: return "NoTransverseRadius";
    case ErrorCode::CurvesTooClose: return "CurvesTooClose";
    case ErrorCode::RoundingAmbiguity: return "RoundingAmbiguity";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

static std::string holonomy_message(int component, double holonomy) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "component %d has Liouville holonomy %.12g", component, holonomy);
  return buf;
}

NotExactError::NotExactError(int component, double holonomy)
    : Error(ErrorCode::NotExact, holonomy_message(component, holonomy)),
      component_(component),
      holonomy_(holonomy) {}

}  // namespace lmcf

#include "frontctrl/errors.hpp"

namespace frontctrl {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::WrongKind: return "wrong-kind";
    case ErrorCode::NoRealEigenvector: return "no-real-eigenvector";
    case ErrorCode::BlowUp: return "blow-up";
    case ErrorCode::BracketFailure: return "bracket-failure";
    case ErrorCode::NoControlNeeded: return "no-control-needed";
    case ErrorCode::A4Violation: return "a4-violation";
    case ErrorCode::Unreachable: return "unreachable-target";
    case ErrorCode::RegionConstruction: return "region-construction";
    case ErrorCode::CflViolation: return "cfl-violation";
    case ErrorCode::FrontHitBoundary: return "front-hit-boundary";
    case ErrorCode::LayerUnderresolved: return "layer-underresolved";
    case ErrorCode::DegenerateParameterization: return "degenerate-parameterization";
    case ErrorCode::ExtrapolationRefused: return "extrapolation-refused";
    case ErrorCode::AnnulusOverlap: return "annulus-overlap";
    case ErrorCode::VencViolation: return "venc-violation";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace frontctrl

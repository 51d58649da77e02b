#pragma once

#include <stdexcept>
#include <string>

namespace frontctrl {

enum class ErrorCode {
  InvalidParameter,
  WrongKind,
  NoRealEigenvector,
  BlowUp,
  BracketFailure,
  NoControlNeeded,
  A4Violation,
  Unreachable,
  RegionConstruction,
  CflViolation,
  FrontHitBoundary,
  LayerUnderresolved,
  DegenerateParameterization,
  ExtrapolationRefused,
  AnnulusOverlap,
  VencViolation,
  Config,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace frontctrl

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trgeo {

enum class ErrorKind {
  // validation failures (bad input, unmet preconditions)
  PointOutsideDomain,
  NotImmersed,
  OrientationReversed,
  FieldNotPositive,
  OutsideAnnulus,
  NotArclength,
  NotNested,
  UnsupportedField,
  StepTooLarge,
  InvalidArgument,
  ParseError,
  UnknownOperation,
  // numerical failures
  MetricNotPositiveDefinite,
  NotTotallyReal,
  DegenerateFrame,
  SignConventionMismatch,
  AliasingDetected,
  AmplificationExceeded,
  BlowUpDetected,
  NoConvergence,
  GeodesicUnavailable,
};

std::string_view to_string(ErrorKind kind);

/// True for the kinds that signal a numerical breakdown rather than bad input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace trgeo

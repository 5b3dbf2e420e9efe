#include "trgeo/error.hpp"

namespace trgeo {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PointOutsideDomain: return "PointOutsideDomain";
    case ErrorKind::NotImmersed: return "NotImmersed";
    case ErrorKind::OrientationReversed: return "OrientationReversed";
    case ErrorKind::FieldNotPositive: return "FieldNotPositive";
    case ErrorKind::OutsideAnnulus: return "OutsideAnnulus";
    case ErrorKind::NotArclength: return "NotArclength";
    case ErrorKind::NotNested: return "NotNested";
    case ErrorKind::UnsupportedField: return "UnsupportedField";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownOperation: return "UnknownOperation";
    case ErrorKind::MetricNotPositiveDefinite: return "MetricNotPositiveDefinite";
    case ErrorKind::NotTotallyReal: return "NotTotallyReal";
    case ErrorKind::DegenerateFrame: return "DegenerateFrame";
    case ErrorKind::SignConventionMismatch: return "SignConventionMismatch";
    case ErrorKind::AliasingDetected: return "AliasingDetected";
    case ErrorKind::AmplificationExceeded: return "AmplificationExceeded";
    case ErrorKind::BlowUpDetected: return "BlowUpDetected";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::GeodesicUnavailable: return "GeodesicUnavailable";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) { return kind >= ErrorKind::MetricNotPositiveDefinite; }

}  // namespace trgeo

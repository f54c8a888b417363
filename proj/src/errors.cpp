#include "pelab/errors.hpp"

namespace pelab {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonFiniteProfile: return "NonFiniteProfile";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::RadiusOutOfRange: return "RadiusOutOfRange";
        case ErrorCode::ShiftNotPositive: return "ShiftNotPositive";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::ShiftBelowThreshold: return "ShiftBelowThreshold";
        case ErrorCode::NewtonDiverged: return "NewtonDiverged";
        case ErrorCode::NonAdmissibleMetric: return "NonAdmissibleMetric";
        case ErrorCode::NegativeConformalFactor: return "NegativeConformalFactor";
        case ErrorCode::IterationStalled: return "IterationStalled";
        case ErrorCode::LimitNotConverged: return "LimitNotConverged";
        case ErrorCode::StepRejected: return "StepRejected";
        case ErrorCode::MonotonicityViolated: return "MonotonicityViolated";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::PreconditionFailed: return "PreconditionFailed";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::SpecInvalid: return "SpecInvalid";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace pelab

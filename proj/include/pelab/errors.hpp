#pragma once

#include <stdexcept>
#include <string>

namespace pelab {

enum class ErrorCode {
    InvalidArgument,
    NonFiniteProfile,
    GridMismatch,
    RadiusOutOfRange,
    ShiftNotPositive,
    SingularSystem,
    ShiftBelowThreshold,
    NewtonDiverged,
    NonAdmissibleMetric,
    NegativeConformalFactor,
    IterationStalled,
    LimitNotConverged,
    StepRejected,
    MonotonicityViolated,
    StepFailure,
    InsufficientData,
    PreconditionFailed,
    ConfigInvalid,
    SpecInvalid,
    IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pelab

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ratedml {

/// Machine-readable failure kinds raised by the library.
enum class ErrorCode {
    // configuration / caller errors
    BadConfig,
    BadK,
    BadKind,
    BadPhi,
    TooFewReps,
    InvalidArgument,
    // data errors
    Io,
    MalformedRow,
    UnparseableTime,
    DuplicateColumn,
    NonMonotoneTime,
    IrregularSpacing,
    TooFewPoints,
    IndexMismatch,
    TooShort,
    TooFewRows,
    InsufficientData,
    EmptyTrainMask,
    ConstantColumn,
    LengthMismatch,
    DimensionMismatch,
    MissingInput,
    // numerical failures
    SingularRegression,
    SingularCovariance,
    NotSymmetric,
    RankDeficient,
    ConstantTarget,
    DegenerateTreatment,
    ExplosiveCoefficients,
    // acceptance harness
    ValidationFailed,
};

/// Coarse grouping used for process exit codes.
enum class ErrorCategory { Config = 1, Data = 2, Numerical = 3, Validation = 4 };

std::string_view code_name(ErrorCode code) noexcept;
ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

    /// Same error with extra context prepended to the message.
    Error with_context(std::string_view context) const {
        return Error(code_, std::string(context) + ": " + what());
    }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace ratedml

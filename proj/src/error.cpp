#include "ratedml/error.hpp"

namespace ratedml {

std::string_view code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::BadK: return "BadK";
        case ErrorCode::BadKind: return "BadKind";
        case ErrorCode::BadPhi: return "BadPhi";
        case ErrorCode::TooFewReps: return "TooFewReps";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::UnparseableTime: return "UnparseableTime";
        case ErrorCode::DuplicateColumn: return "DuplicateColumn";
        case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
        case ErrorCode::IrregularSpacing: return "IrregularSpacing";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::IndexMismatch: return "IndexMismatch";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::EmptyTrainMask: return "EmptyTrainMask";
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::MissingInput: return "MissingInput";
        case ErrorCode::SingularRegression: return "SingularRegression";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::ConstantTarget: return "ConstantTarget";
        case ErrorCode::DegenerateTreatment: return "DegenerateTreatment";
        case ErrorCode::ExplosiveCoefficients: return "ExplosiveCoefficients";
        case ErrorCode::ValidationFailed: return "ValidationFailed";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::BadConfig:
        case ErrorCode::BadK:
        case ErrorCode::BadKind:
        case ErrorCode::BadPhi:
        case ErrorCode::TooFewReps:
        case ErrorCode::InvalidArgument:
            return ErrorCategory::Config;
        case ErrorCode::SingularRegression:
        case ErrorCode::SingularCovariance:
        case ErrorCode::NotSymmetric:
        case ErrorCode::RankDeficient:
        case ErrorCode::ConstantTarget:
        case ErrorCode::DegenerateTreatment:
        case ErrorCode::ExplosiveCoefficients:
            return ErrorCategory::Numerical;
        case ErrorCode::ValidationFailed:
            return ErrorCategory::Validation;
        default:
            return ErrorCategory::Data;
    }
}

}  // namespace ratedml

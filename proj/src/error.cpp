#include "facemorph/error.hpp"

namespace facemorph {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::WrongLandmarkCount: return "WrongLandmarkCount";
        case ErrorCode::OutOfRangeCoordinate: return "OutOfRangeCoordinate";
        case ErrorCode::ZeroNormEmbedding: return "ZeroNormEmbedding";
        case ErrorCode::NegativeAge: return "NegativeAge";
        case ErrorCode::UnsupportedSchemaVersion: return "UnsupportedSchemaVersion";
        case ErrorCode::MalformedManifest: return "MalformedManifest";
        case ErrorCode::DuplicateSubjectId: return "DuplicateSubjectId";
        case ErrorCode::MissingRecordFile: return "MissingRecordFile";
        case ErrorCode::RolePairingError: return "RolePairingError";
        case ErrorCode::EmptyCohort: return "EmptyCohort";
        case ErrorCode::DegenerateEyeDistance: return "DegenerateEyeDistance";
        case ErrorCode::EmptyPointSet: return "EmptyPointSet";
        case ErrorCode::EmptySide: return "EmptySide";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::MissingAge: return "MissingAge";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::MissingEmbedding: return "MissingEmbedding";
        case ErrorCode::EmptyImposterSet: return "EmptyImposterSet";
        case ErrorCode::EmptyGenuineSet: return "EmptyGenuineSet";
        case ErrorCode::TooFewPairs: return "TooFewPairs";
        case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::InconsistentCoverage: return "InconsistentCoverage";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace facemorph

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facemorph {

enum class ErrorCode {
    MissingField,
    InvalidValue,
    WrongLandmarkCount,
    OutOfRangeCoordinate,
    ZeroNormEmbedding,
    NegativeAge,
    UnsupportedSchemaVersion,
    MalformedManifest,
    DuplicateSubjectId,
    MissingRecordFile,
    RolePairingError,
    EmptyCohort,
    DegenerateEyeDistance,
    EmptyPointSet,
    EmptySide,
    DegenerateDenominator,
    MissingAge,
    DimensionMismatch,
    ZeroNorm,
    MissingEmbedding,
    EmptyImposterSet,
    EmptyGenuineSet,
    TooFewPairs,
    AllZeroDifferences,
    ZeroVariance,
    InconsistentCoverage,
    InvalidArgument,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the named codes above;
/// the message names the offending field, file, or subject.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace facemorph

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace touchsig {

enum class ErrorCode {
    MalformedRecord,
    UnknownChannel,
    NonFiniteValue,
    NoOpenSegment,
    EmptySegment,
    StorageFailure,
    BindFailure,
    LabelNotInSpec,
    InvalidSpec,
    EmptySequence,
    LengthMismatch,
    TooShort,
    ZeroEnergy,
    SequenceTooShort,
    InvalidTrace,
    EmptyTrainingSet,
    InconsistentDimensions,
    KTooLarge,
    DimensionMismatch,
    BadDimensions,
    DegenerateSplit,
    NonFiniteLoss,
    ModelNotFound,
    BadModelFile,
    UsageError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every module reports failures through this exception; `code()` identifies the
/// failure kind so callers (and tests) can branch on it without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace touchsig

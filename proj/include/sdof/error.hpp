#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sdof {

enum class Errc {
    InvalidArgument,
    // imaging
    MalformedHeader,
    TruncatedData,
    UnsupportedMaxval,
    TooManyLevels,
    ImageTooSmall,
    OutOfBounds,
    // optflow
    DimensionMismatch,
    // tracking core
    EmptyInput,
    NoEligiblePixels,
    DegenerateVariance,
    AllPointsLost,
    // pipeline
    NonMonotonicFrameIndex,
    MissingDetections,
    // mot-io
    ParseError,
    NegativeDimensions,
    UnsortedInput,
    MalformedPbm,
    UnknownKey,
    InvalidValue,
    // metrics
    EmptyGroundTruth,
    // synth
    ObjectLeavesImage,
    // file access
    IoError,
};

std::string_view errc_name(Errc code) noexcept;

/// Error raised by every sdof module. `subject()` names the offending key,
/// file or field when one exists; `position()` is a byte offset or a
/// 1-based line number depending on the error kind, or -1.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::string subject = {},
          std::int64_t position = -1);

    Errc code() const noexcept { return code_; }
    const std::string& subject() const noexcept { return subject_; }
    std::int64_t position() const noexcept { return position_; }

private:
    Errc code_;
    std::string subject_;
    std::int64_t position_;
};

}  // namespace sdof

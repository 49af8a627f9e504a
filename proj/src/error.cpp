#include "sdof/error.hpp"

namespace sdof {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::MalformedHeader: return "MalformedHeader";
        case Errc::TruncatedData: return "TruncatedData";
        case Errc::UnsupportedMaxval: return "UnsupportedMaxval";
        case Errc::TooManyLevels: return "TooManyLevels";
        case Errc::ImageTooSmall: return "ImageTooSmall";
        case Errc::OutOfBounds: return "OutOfBounds";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::NoEligiblePixels: return "NoEligiblePixels";
        case Errc::DegenerateVariance: return "DegenerateVariance";
        case Errc::AllPointsLost: return "AllPointsLost";
        case Errc::NonMonotonicFrameIndex: return "NonMonotonicFrameIndex";
        case Errc::MissingDetections: return "MissingDetections";
        case Errc::ParseError: return "ParseError";
        case Errc::NegativeDimensions: return "NegativeDimensions";
        case Errc::UnsortedInput: return "UnsortedInput";
        case Errc::MalformedPbm: return "MalformedPbm";
        case Errc::UnknownKey: return "UnknownKey";
        case Errc::InvalidValue: return "InvalidValue";
        case Errc::EmptyGroundTruth: return "EmptyGroundTruth";
        case Errc::ObjectLeavesImage: return "ObjectLeavesImage";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message, std::string subject,
             std::int64_t position)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      subject_(std::move(subject)),
      position_(position) {}

}  // namespace sdof

#include "tcpvad/error.hpp"

namespace tcpvad {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::EmptyDirectory: return "EmptyDirectory";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::MalformedImage: return "MalformedImage";
        case Errc::BadMagic: return "BadMagic";
        case Errc::UnsupportedVersion: return "UnsupportedVersion";
        case Errc::TruncatedPayload: return "TruncatedPayload";
        case Errc::InvalidSpec: return "InvalidSpec";
        case Errc::GridTooFine: return "GridTooFine";
        case Errc::DegenerateData: return "DegenerateData";
        case Errc::NonConvergentSvd: return "NonConvergentSVD";
        case Errc::TooFewSamples: return "TooFewSamples";
        case Errc::SequenceTooShort: return "SequenceTooShort";
        case Errc::CodeOutOfRange: return "CodeOutOfRange";
        case Errc::EmptyHistogram: return "EmptyHistogram";
        case Errc::UnnormalizedInput: return "UnnormalizedInput";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::MissingMasks: return "MissingMasks";
        case Errc::DegenerateCurve: return "DegenerateCurve";
        case Errc::IoError: return "IoError";
        case Errc::ConfigParseError: return "ConfigParseError";
    }
    return "Unknown";
}

bool is_io_error(Errc code) noexcept {
    switch (code) {
        case Errc::EmptyDirectory:
        case Errc::MalformedImage:
        case Errc::BadMagic:
        case Errc::UnsupportedVersion:
        case Errc::TruncatedPayload:
        case Errc::IoError:
            return true;
        default:
            return false;
    }
}

}  // namespace tcpvad

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcpvad {

enum class Errc {
    InvalidArgument,
    EmptyDirectory,
    DimensionMismatch,
    MalformedImage,
    BadMagic,
    UnsupportedVersion,
    TruncatedPayload,
    InvalidSpec,
    GridTooFine,
    DegenerateData,
    NonConvergentSvd,
    TooFewSamples,
    SequenceTooShort,
    CodeOutOfRange,
    EmptyHistogram,
    UnnormalizedInput,
    LengthMismatch,
    MissingMasks,
    DegenerateCurve,
    IoError,
    ConfigParseError,
};

std::string_view to_string(Errc code) noexcept;

// I/O failures are reported separately from validation failures by the CLI.
bool is_io_error(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace tcpvad

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adnpca {

enum class ErrorKind {
    MalformedFile,
    NonFiniteEntry,
    DimensionMismatch,
    IoFailure,
    UnknownStage,
    InvalidArgument,
    TooFewSamples,
    DegenerateInput,
    NumericalFailure,
    KOutOfRange,
    DegenerateSpectrum,
    PairingMismatch,
    ZeroNormalScore,
    EmptyClass,
    InvalidSpec,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Numerical failures map to CLI exit code 3; everything else is an input error.
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace adnpca

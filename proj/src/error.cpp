#include "adnpca/error.hpp"

namespace adnpca {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::MalformedFile: return "MalformedFile";
        case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::UnknownStage: return "UnknownStage";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
        case ErrorKind::KOutOfRange: return "KOutOfRange";
        case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorKind::PairingMismatch: return "PairingMismatch";
        case ErrorKind::ZeroNormalScore: return "ZeroNormalScore";
        case ErrorKind::EmptyClass: return "EmptyClass";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
    }
    return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::DegenerateInput:
        case ErrorKind::NumericalFailure:
        case ErrorKind::DegenerateSpectrum:
        case ErrorKind::ZeroNormalScore:
            return true;
        default:
            return false;
    }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace adnpca

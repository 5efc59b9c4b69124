#pragma once

#include <stdexcept>
#include <string>

namespace rsm {

enum class ErrorCode {
    AlphabetMismatch,
    InvalidDistribution,
    NonStationary,
    CouplingMismatch,
    DepthTooSmall,
    MultipleInvariantMeasures,
    UnknownExample,
    TruncationTooSmall,
    InconsistentTables,
    NotUniformMartingale,
    Unsupported,
    Precondition,
    CannotCertify,
    TauNegative,
    AlphabetTooLarge,
    IncompleteRepresentation,
    Parse,
    WarmUp,
    Overflow,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace rsm

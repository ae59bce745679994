#pragma once

#include <stdexcept>
#include <string>

namespace tweeze {

// Exit codes used by the CLI when one of these escapes a subcommand.
constexpr int kExitConfigError = 2;
constexpr int kExitNumericError = 3;
constexpr int kExitVerificationFailure = 4;
constexpr int kExitIoError = 5;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: malformed config files, unresolved distribution names,
// invalid grid requests.
struct ConfigError : Error {
    using Error::Error;
};

// Math-level failures: non-finite state, shape mismatches, evaluation in a
// degenerate schedule region.
struct NumericError : Error {
    using Error::Error;
};

struct ShapeError : NumericError {
    using NumericError::NumericError;
};

struct DomainError : NumericError {
    using NumericError::NumericError;
};

struct DegenerateTimestepError : NumericError {
    using NumericError::NumericError;
};

struct UnreliableEstimateError : NumericError {
    using NumericError::NumericError;
};

struct VerificationError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace tweeze

#pragma once

#include <stdexcept>
#include <string>

namespace saln {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures.
struct NonFiniteInput : Error {
    using Error::Error;
};
struct ConvergenceFailure : Error {
    using Error::Error;
};

// Contract violations on inputs.
struct BatchTooSmall : Error {
    using Error::Error;
};
struct InvalidFilterRatio : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct LabelOutOfRange : Error {
    using Error::Error;
};
struct EmptyDataset : Error {
    using Error::Error;
};
struct InvalidParams : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

// File handling.
struct IoError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};

} // namespace saln

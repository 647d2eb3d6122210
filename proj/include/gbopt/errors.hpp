#pragma once

#include <stdexcept>
#include <string>

namespace gbopt {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Graph construction / validation.
struct CyclicGraphError : Error {
    using Error::Error;
};
struct BoundViolationError : Error {
    using Error::Error;
};
struct EmptyDomainError : Error {
    using Error::Error;
};

// Evaluation.
struct DomainViolationError : Error {
    using Error::Error;
};
struct OutputBoundViolationError : Error {
    using Error::Error;
};
struct DimensionMismatchError : Error {
    using Error::Error;
};

// Numerics.
struct NumericalBreakdownError : Error {
    using Error::Error;
};
struct UnsupportedKernelError : Error {
    using Error::Error;
};

// Harness.
struct ConfigParseError : Error {
    using Error::Error;
};
struct MissingGroundTruthError : Error {
    using Error::Error;
};

}  // namespace gbopt

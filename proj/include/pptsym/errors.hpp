#pragma once

#include <stdexcept>
#include <string>

namespace pptsym {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension or index outside what an operation supports.
struct SizeError : Error {
    using Error::Error;
};

// Operator has weight outside the symmetric subspace.
struct SupportError : Error {
    using Error::Error;
};

// Input violates a documented precondition (not PPT, not Hermitian, ...).
struct PreconditionError : Error {
    using Error::Error;
};

// Parameter lies on a boundary where the requested test does not apply.
struct BoundaryError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

// Wraps an error raised inside a named pipeline stage.
struct StageError : Error {
    StageError(std::string stage_, const std::string& what)
        : Error("[" + stage_ + "] " + what), stage(std::move(stage_)) {}
    std::string stage;
};

}  // namespace pptsym

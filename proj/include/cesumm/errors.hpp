#pragma once

#include <stdexcept>
#include <string>

namespace cesumm {

/// Base class of every exception thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An input file does not conform to its documented schema.
struct SchemaError : Error {
    using Error::Error;
};

/// Structurally valid input that violates a documented constraint.
struct ValidationError : Error {
    using Error::Error;
};

/// An API contract was violated by the caller.
struct UsageError : Error {
    using Error::Error;
};

/// The optimizer could not make progress (e.g. no feasible sample exists).
struct OptimizationError : Error {
    using Error::Error;
};

/// Scoring could not be carried out (e.g. no usable reference).
struct EvaluationError : Error {
    using Error::Error;
};

/// A broken internal invariant; indicates a bug upstream of the throw site.
struct InternalError : Error {
    using Error::Error;
};

} // namespace cesumm

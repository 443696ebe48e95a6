#pragma once

#include <stdexcept>
#include <string>

namespace contactkit {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape mismatch in a linear-algebra or contraction operation.
struct DimensionError : Error {
    using Error::Error;
};

// An iterative kernel (QR, SVD sweep) failed to converge.
struct NumericalError : Error {
    using Error::Error;
};

// A model callback produced a non-finite value.
struct EvaluationError : Error {
    using Error::Error;
};

// Newton projection onto the critical manifold did not converge.
struct ProjectionError : Error {
    double final_residual = 0.0;
    ProjectionError(const std::string& msg, double residual)
        : Error(msg), final_residual(residual) {}
};

// A root search (contact point, equilibrium, continuation start) failed.
struct SearchError : Error {
    using Error::Error;
};

// Model lookup with a name not present in the zoo.
struct UnknownModelError : Error {
    using Error::Error;
};

// Parameter override outside its admissible range.
struct ParameterError : Error {
    using Error::Error;
};

// Malformed custom model definition file.
struct ModelParseError : Error {
    using Error::Error;
};

}  // namespace contactkit

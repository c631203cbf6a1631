#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace semi {

// Base class for all library failures so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument (invalid mode index, mismatched dimensions, ...).
struct ArgumentError : Error {
    explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

// Fock-space cutoff too small for the requested computation.
struct TruncationError : Error {
    TruncationError(const std::string& msg, int suggested)
        : Error(msg), suggested_n_max(suggested) {}
    int suggested_n_max = -1;
};

// Adaptive quadrature failed to stabilise within the level budget.
struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

// Symbol violates the structural requirements of the admissible class.
struct ClassSViolation : Error {
    explicit ClassSViolation(const std::string& msg) : Error(msg) {}
};

// Density with negative values beyond roundoff, or unnormalised input.
struct InvalidDensityError : Error {
    explicit InvalidDensityError(const std::string& msg) : Error(msg) {}
};

// Gram-Schmidt hit near-dependent vectors; offending enumeration indices attached.
struct DegenerateBasisError : Error {
    DegenerateBasisError(const std::string& msg, std::vector<int> bad)
        : Error(msg), indices(std::move(bad)) {}
    std::vector<int> indices;
};

// Requested object exceeds the configured size caps.
struct ResourceError : Error {
    explicit ResourceError(const std::string& msg) : Error(msg) {}
};

// Experiment configuration could not be parsed or validated.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace semi

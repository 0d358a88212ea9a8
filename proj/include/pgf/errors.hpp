#pragma once

#include <stdexcept>
#include <string>

namespace pgf {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A precondition on an operation's inputs was violated (wrong representation
/// tag, mismatched grids, invalid exponents, ...).
struct ContractViolation : Error {
    using Error::Error;
};

struct InvalidExponent : ContractViolation {
    using ContractViolation::ContractViolation;
};

struct NotIsotropic : Error {
    using Error::Error;
};

struct ZeroVector : Error {
    using Error::Error;
};

struct OutOfChart : Error {
    using Error::Error;
};

struct NotLocallyIntegrable : Error {
    using Error::Error;
};

struct SeriesDiverged : Error {
    double contraction_factor;
    SeriesDiverged(const std::string& msg, double factor)
        : Error(msg), contraction_factor(factor) {}
};

struct FrameInfeasible : Error {
    using Error::Error;
};

struct AssumptionAViolated : Error {
    using Error::Error;
};

struct InvalidSigma : Error {
    using Error::Error;
};

struct NumericalFailure : Error {
    using Error::Error;
};

} // namespace pgf

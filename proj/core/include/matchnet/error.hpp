#pragma once

#include <stdexcept>
#include <string>

namespace matchnet {

/// Invalid argument to a mathematical operation (probability outside [0,1],
/// negative rate, s < 0 in an mgf, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical routine (quadrature, series truncation) failed to reach its
/// target accuracy. Carries the accuracy it did achieve.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// A constructed object fails its defining check (non-FOSD sweep, pair that is
/// not a mean-preserving spread, unnormalized model, ...).
class ConstructionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Exhaustive-enumeration oracle asked to enumerate beyond its size guard.
class SizeGuardError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Malformed configuration or model JSON. The message names the offending key.
class SchemaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value with a rigorous (or quadrature-estimated) absolute error bound.
struct Bounded {
    double value = 0.0;
    double error_bound = 0.0;
};

}  // namespace matchnet

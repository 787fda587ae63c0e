#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chp {

/// Absolute comparison tolerance, scaled by the magnitude of the compared
/// quantities. Shared by every numeric decision in the library and by the
/// property suites.
inline constexpr double kTol = 1e-9;

inline double tol_scale(double a, double b, double tol = kTol) {
    return tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline bool nearly_equal(double a, double b, double tol = kTol) {
    return std::fabs(a - b) <= tol_scale(a, b, tol);
}

/// a < b by more than the scaled tolerance.
inline bool definitely_less(double a, double b, double tol = kTol) {
    return a < b - tol_scale(a, b, tol);
}

inline bool leq_within_tol(double a, double b, double tol = kTol) {
    return a <= b + tol_scale(a, b, tol);
}

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Demand exceeds what the remaining fleet can serve.
class InfeasibleError : public Error {
  public:
    InfeasibleError(const std::string& what, double shortfall_mw)
        : Error(what), shortfall(shortfall_mw) {}
    double shortfall = 0.0;
};

/// Malformed argument values (negative output, negative demand, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Scenario document does not match the expected schema.
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// Scenario parses but violates a configuration constraint.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Exhaustive enumeration was requested beyond its size bound.
class InstanceTooLargeError : public Error {
  public:
    using Error::Error;
};

}  // namespace chp

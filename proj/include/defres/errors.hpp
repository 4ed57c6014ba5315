#pragma once

#include <stdexcept>
#include <string>

namespace defres {

/// Invalid user input (config files, out-of-range arguments).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mathematical precondition of a solver does not hold (band energy,
/// degenerate Jacobian, vanishing non-degeneracy margin, ...).
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Step-size underflow in the ODE integrator.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double x)
        : std::runtime_error(what + " at x = " + std::to_string(x)), x_(x) {}

    double where() const noexcept { return x_; }

private:
    double x_;
};

}  // namespace defres

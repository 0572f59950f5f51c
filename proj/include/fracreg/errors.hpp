#pragma once

#include <stdexcept>
#include <string>

namespace fracreg {

// Bad input values (non-finite parameters, violated preconditions).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Evaluation outside the domain of a fractional power, e.g. 0^q with q < 0.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Fractional order outside the range the state-space builders support.
class UnsupportedOrder : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested run exceeds the configured step budget.
class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The implicit GL step has a vanishing coefficient on the unknown sample.
class SingularStep : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A design solver found no admissible parameters.
class NoSolution : public std::runtime_error {
public:
    NoSolution(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace fracreg

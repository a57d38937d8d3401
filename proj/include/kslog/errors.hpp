#pragma once

#include <stdexcept>
#include <string>

namespace kslog {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Arrays that do not conform to the grid they are used with.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A solution component reached a non-positive or non-finite value.
class PositivityError : public std::runtime_error {
public:
    PositivityError(const std::string& what, double time)
        : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

/// Requested time step exceeds the positivity/stability bound of the scheme.
class StabilityError : public std::runtime_error {
public:
    StabilityError(const std::string& what, double time)
        : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

/// Linear solver failed to reach the requested residual.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kslog

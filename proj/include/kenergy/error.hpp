#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kenergy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a structural invariant (convexity, slope range, grid shape).
class InvalidPotential : public Error {
public:
    InvalidPotential(const std::string& what, std::size_t node)
        : Error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
    explicit InvalidPotential(const std::string& what) : Error(what) {}

    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_ = static_cast<std::size_t>(-1);
};

/// Metric density below the degeneracy threshold where an operation needs it positive.
class DegenerateMetric : public Error {
public:
    using Error::Error;
};

/// Malformed files, configs, or arguments.
class InputError : public Error {
public:
    using Error::Error;
};

/// Iterative procedure did not reach its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace kenergy

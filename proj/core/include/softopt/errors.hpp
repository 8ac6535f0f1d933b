#pragma once

#include <stdexcept>
#include <string>

namespace softopt {

/// Precondition or invariant violated by the caller.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A design whose geometry cannot be built (clearance violated, target unreachable).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside the static solver.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvertedElementError : public SolverError {
public:
    explicit InvertedElementError(std::size_t element)
        : SolverError("inverted element " + std::to_string(element)), element_(element) {}

    [[nodiscard]] std::size_t element() const noexcept { return element_; }

private:
    std::size_t element_;
};

} // namespace softopt

#pragma once

#include <stdexcept>
#include <string>

namespace dcl {

/// Raised when a caller hands an operation input that violates its precondition.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a node reads information it could not have received over a sensing edge.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Numerical failure inside an analysis routine (e.g. eigen-solver did not converge).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dcl

#pragma once

#include <stdexcept>
#include <string>

namespace gridiot {

/// Invalid or inconsistent user-supplied parameters.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Quadrature, fixed-point or linear-algebra failure.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// The queue is not positive recurrent (utilization >= 1).
class UnstableQueueError : public std::domain_error {
public:
    explicit UnstableQueueError(const std::string& what) : std::domain_error(what) {}
};

} // namespace gridiot

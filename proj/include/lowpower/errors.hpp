#pragma once

#include <stdexcept>
#include <string>

namespace lowpower {

/// Argument outside the physical or logical domain of an operation.
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Numerical procedure failed to converge or bracket (internal invariant).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Exhaustive procedure refused because the input exceeds its size limit.
class CapacityError : public std::length_error {
public:
  explicit CapacityError(const std::string& what) : std::length_error(what) {}
};

} // namespace lowpower

#pragma once

#include <stdexcept>
#include <string>

namespace spotvol {

/// Invalid argument or configuration (bad law parameters, malformed block, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mathematically undefined request, e.g. an infinite moment (p >= beta).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A confidence-interval constructor was called outside its asymptotic regime.
class RegimeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An estimator could not produce a value from the data (zero counts, log of zero).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spotvol

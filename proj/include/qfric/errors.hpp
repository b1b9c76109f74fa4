#pragma once

#include <stdexcept>
#include <string>

namespace qfric {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested Hilbert space exceeds the dense-construction limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (T <= 0, L != 0 for
// the free-fermion solver, t outside [0, tau], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Eigensolver, integrator, root bracketing or physical-invariant failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qfric

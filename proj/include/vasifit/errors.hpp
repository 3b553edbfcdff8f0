#pragma once

#include <stdexcept>
#include <string>

namespace vasifit {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or size mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input outside the mathematical domain of the operation (non-finite
// entries, negative time, eigenvalue below the PSD tolerance, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Bad or inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Noise synthesis failed (circulant embedding and its fallback both
// unavailable).
class SynthesisError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be inverted is singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Not enough observations for the requested estimation window.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// CSV schema problems (missing column, non-monotone dates, ...).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// The Riccati solver could not produce a positive definite solution.
class NoPdSolutionError : public Error {
 public:
  using Error::Error;
};

// I/O failure (unreadable or unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vasifit

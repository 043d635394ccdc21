#pragma once

#include <stdexcept>
#include <string>

namespace thzrefl {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the mathematical domain of the operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A denominator collapsed (|.| < 1e-300) during a physics evaluation.
class DegenerateError : public Error {
public:
  using Error::Error;
};

/// A log-linear exponent left the representable range.
class OverflowError : public Error {
public:
  using Error::Error;
};

/// The damped normal equations could not be solved.
class SingularError : public Error {
public:
  using Error::Error;
};

/// A band has fewer samples than parameters.
class UnderdeterminedError : public Error {
public:
  using Error::Error;
};

/// Too few usable band fits to build a trend.
class InsufficientBandsError : public Error {
public:
  using Error::Error;
};

/// Malformed or inconsistent input data (CSV columns, grids, sweeps).
class IngestionError : public Error {
public:
  using Error::Error;
};

class UnknownMaterialError : public Error {
public:
  using Error::Error;
};

class LengthMismatchError : public Error {
public:
  using Error::Error;
};

}  // namespace thzrefl

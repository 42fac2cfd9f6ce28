#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dpcheck {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// -- circuit construction / evaluation ------------------------------------

/// A gate references a node at or after its own position.
class CycleError : public Error {
  public:
    using Error::Error;
};

/// A statement carries the wrong number of operands.
class ArityError : public Error {
  public:
    using Error::Error;
};

/// A record, bit, random or output index is out of range.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// A circuit was built with no outputs.
class EmptyOutputsError : public Error {
  public:
    using Error::Error;
};

/// Input or random vector length does not match circuit metadata.
class LengthError : public Error {
  public:
    using Error::Error;
};

/// A requested enumeration exceeds the configured resource bound.
class ResourceBoundError : public Error {
  public:
    using Error::Error;
};

/// A conditioned circuit has no successful run for the given input.
class ZeroSuccessError : public Error {
  public:
    using Error::Error;
};

/// Operation requires a conditioned circuit.
class NotConditionedError : public Error {
  public:
    using Error::Error;
};

// -- source-language frontend ----------------------------------------------

/// Error in a source text, with 1-based line/column position.
class SourceError : public Error {
  public:
    SourceError(const std::string& message, std::size_t line, std::size_t column)
        : Error(message + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

class SyntaxError : public SourceError {
  public:
    using SourceError::SourceError;
};

class UseBeforeAssignError : public SourceError {
  public:
    using SourceError::SourceError;
};

class ConstantOutOfRangeError : public SourceError {
  public:
    using SourceError::SourceError;
};

class TypeError : public SourceError {
  public:
    using SourceError::SourceError;
};

// -- generators and parameters ----------------------------------------------

/// A probability parameter is outside its admissible range.
class InvalidProbabilityError : public Error {
  public:
    using Error::Error;
};

/// Mechanism parameters are not realizable with fair coins.
class NonDyadicError : public Error {
  public:
    using Error::Error;
};

/// Malformed command-line or API usage (bad rational, alpha < 1, ...).
class UsageError : public Error {
  public:
    using Error::Error;
};

}  // namespace dpcheck

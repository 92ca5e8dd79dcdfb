#pragma once

#include <stdexcept>
#include <string>

namespace ntkmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. a
/// correlation far outside [-1, 1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Incompatible dimensions, odd sizes where even ones are required, bad
/// layer sequences.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range coordinate or index.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Linear algebra or iteration failure: singular systems, divergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files (CSV, PNG, kernel files, arch specs).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Valid input that violates the hypotheses of an algorithm (e.g. expanding
/// a kernel built with bilinear upsampling).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace ntkmc

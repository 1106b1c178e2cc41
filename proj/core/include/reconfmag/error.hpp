#pragma once

#include <stdexcept>
#include <string>

namespace reconfmag {

// Base class for every error raised by the library. The CLI maps any
// Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Field evaluation outside a map, inside a masked cell, on a conductor or
// inside the winding volume.
class DomainError : public Error {
 public:
  using Error::Error;
};

class MechanismError : public Error {
 public:
  using Error::Error;
};

// Least-norm synthesis could not reproduce the requested field.
class SynthesisError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Violated argument contract (bad sizes, non-unit vectors, empty logs...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class LibraryFormatError : public Error {
 public:
  using Error::Error;
};

class VersionMismatchError : public LibraryFormatError {
 public:
  using LibraryFormatError::LibraryFormatError;
};

class HashMismatchError : public LibraryFormatError {
 public:
  using LibraryFormatError::LibraryFormatError;
};

class TruncatedFileError : public LibraryFormatError {
 public:
  using LibraryFormatError::LibraryFormatError;
};

}  // namespace reconfmag

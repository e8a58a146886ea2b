#pragma once

#include <stdexcept>
#include <string>

namespace sqzcam {

/// Input outside an operation's domain (bad transmission, empty batch, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A derivative used for error propagation vanished.
class DegenerateDerivativeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fock truncation left more probability mass outside the basis than allowed.
class InsufficientCutoffError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frame file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frame file is structurally damaged (truncated, bad magic, bad checksum).
class CorruptFileError : public IoError {
 public:
  using IoError::IoError;
};

/// Frame file was written by an incompatible format version.
class FormatVersionError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace sqzcam

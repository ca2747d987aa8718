#pragma once

#include <stdexcept>
#include <string>

namespace claimnet {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (bad alpha, infeasible synth config, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (bad CSV row, unknown node, degenerate class, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures: missing file, unwritable path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Binary snapshot failed validation (magic, version, checksum, truncation).
class CorruptFileError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace claimnet

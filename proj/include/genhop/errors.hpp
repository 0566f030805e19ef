#pragma once

#include <stdexcept>
#include <string>

namespace genhop {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Tensor or matrix shapes do not agree with what an operation expects.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Too few samples to fit a model of the requested size.
class InsufficientSamplesError : public Error {
public:
  using Error::Error;
};

/// Training data carries no usable variation.
class DegenerateDataError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed or unsupported file contents.
class FormatError : public Error {
public:
  using Error::Error;
};

class VersionMismatchError : public FormatError {
public:
  using FormatError::FormatError;
};

class ChecksumError : public FormatError {
public:
  using FormatError::FormatError;
};

}  // namespace genhop

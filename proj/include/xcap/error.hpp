#pragma once

#include <stdexcept>
#include <string>

namespace xcap {

// Base for every error raised by the library. Callers that only need to
// report a failure can catch this; the subclasses exist so tests and the
// daemon can distinguish operator-recoverable conditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class NoImpulseError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class DegenerateRegressionError : public Error {
 public:
  using Error::Error;
};

class NoMaskError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace xcap

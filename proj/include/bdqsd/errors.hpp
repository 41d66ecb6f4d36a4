#pragma once

#include <stdexcept>
#include <string>

namespace bdqsd {

// Base class; every library failure derives from this so the CLI can map
// them to exit codes in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidModel : public Error {
 public:
  using Error::Error;
};

class NoCrossing : public Error {
 public:
  using Error::Error;
};

class TruncationFailure : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class NonPositiveCoefficient : public Error {
 public:
  using Error::Error;
};

class RhoOutOfRange : public Error {
 public:
  using Error::Error;
};

class NoSignChange : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class TimeTooLarge : public Error {
 public:
  using Error::Error;
};

class InsufficientSurvivors : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bdqsd

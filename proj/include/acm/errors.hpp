#pragma once

#include <stdexcept>
#include <string>

namespace acm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class AmplitudeError : public Error {
 public:
  using Error::Error;
};

// Raised when a state drifts outside the density-matrix thresholds or a
// truncation cannot be made small enough.
class NumericalDegradation : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public NumericalDegradation {
 public:
  using NumericalDegradation::NumericalDegradation;
};

class DegenerateNullSpace : public NumericalDegradation {
 public:
  using NumericalDegradation::NumericalDegradation;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class MemoryGuard : public Error {
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

}  // namespace acm

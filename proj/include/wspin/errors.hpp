#pragma once

#include <stdexcept>
#include <string>

namespace wspin {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Representation or argument outside the supported range.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Evaluation at a kernel singularity.
class PoleError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidInteriorError : public Error {
 public:
  using Error::Error;
};

class GluingError : public Error {
 public:
  using Error::Error;
};

class InfeasibleCompactificationError : public Error {
 public:
  using Error::Error;
};

class MollifierFailureError : public Error {
 public:
  using Error::Error;
};

// Numerical procedure failed to reach the requested tolerance.
class ToleranceError : public Error {
 public:
  ToleranceError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

class AccuracyError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

// Cutoff-localized quantity leaked outside its support.
class CutoffError : public Error {
 public:
  using Error::Error;
};

class IdentityMismatchError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wspin

#pragma once

#include <stdexcept>
#include <string>

namespace amc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// log() of a rotation too close to pi to pick a branch.
class NearAntipodalError : public Error {
 public:
  explicit NearAntipodalError(double angle)
      : Error("near-antipodal rotation (angle " + std::to_string(angle) + " rad)") {}
};

class DegenerateTemplateError : public Error {
 public:
  explicit DegenerateTemplateError(const std::string& why)
      : Error("degenerate template: " + why) {}
};

class InsufficientOverlapError : public Error {
 public:
  InsufficientOverlapError(std::size_t valid, std::size_t total)
      : Error("insufficient overlap: " + std::to_string(valid) + " of " +
              std::to_string(total) + " template pixels sampled validly") {}
};

class FovExceededError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace amc

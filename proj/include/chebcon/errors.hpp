#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chebcon {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInterval : public Error {
 public:
  using Error::Error;
};

class InvalidDegree : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Adaptive interpolation hit its degree cap before meeting the tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual, std::size_t degree)
      : Error(what), residual_(residual), degree_(degree) {}

  double residual() const noexcept { return residual_; }
  std::size_t degree() const noexcept { return degree_; }

 private:
  double residual_;
  std::size_t degree_;
};

class InfeasibleConstraints : public Error {
 public:
  using Error::Error;
};

// A dissemination step was invoked outside the phase it belongs to.
class ProtocolOrder : public Error {
 public:
  using Error::Error;
};

class UnsupportedFamily : public Error {
 public:
  using Error::Error;
};

class InvalidSplit : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace chebcon

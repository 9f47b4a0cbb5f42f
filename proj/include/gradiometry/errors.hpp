#pragma once

#include <stdexcept>
#include <string>

namespace gradiometry {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
 public:
  explicit InvalidGeometry(const std::string& what) : Error("invalid geometry: " + what) {}
};

/// No singlet exists for the requested ensemble (e.g. odd N of qubits).
class NoSinglet : public Error {
 public:
  explicit NoSinglet(const std::string& what) : Error("no singlet: " + what) {}
};

/// Argument outside the domain where a closed form holds.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

class NumericalInconsistency : public Error {
 public:
  explicit NumericalInconsistency(const std::string& what)
      : Error("numerical inconsistency: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

}  // namespace gradiometry

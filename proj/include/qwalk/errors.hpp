#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

// Base for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grid shape or size rejected before anything runs.
struct InvalidGrid : Error {
  using Error::Error;
};

// Amplitude reached the momentum-grid edge above the truncation tolerance.
struct GridTooSmall : Error {
  using Error::Error;
};

// Argument outside the mathematical domain (negative intensity, ...).
struct DomainError : Error {
  using Error::Error;
};

// Result outside the range where the emission model holds (rho > 1).
struct ModelValidity : Error {
  using Error::Error;
};

struct FitError : Error {
  using Error::Error;
};

// Output could not be written.
struct IoError : Error {
  using Error::Error;
};

// Configuration errors carry the offending key.
struct ConfigError : Error {
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace qwalk

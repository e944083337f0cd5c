#pragma once

#include <stdexcept>
#include <string>

namespace seis {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model parameter is outside its admissible range. `field()` names it.
class ParamDomainError : public Error {
 public:
  ParamDomainError(std::string field, const std::string& why)
      : Error("parameter '" + field + "' " + why), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class AmplitudeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// The cutoff straightening map is only a diffeomorphism for |h - h_ref| <= h_ref/8.
class DiffeomorphismError : public Error {
 public:
  using Error::Error;
};

class StepRejectedError : public Error {
 public:
  using Error::Error;
};

class PositivityError : public Error {
 public:
  using Error::Error;
};

class BlowupError : public Error {
 public:
  using Error::Error;
};

class WeightSignError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(what + " (last residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class SingularShiftError : public Error {
 public:
  using Error::Error;
};

class WindowTooShortError : public Error {
 public:
  using Error::Error;
};

class NonDecayError : public Error {
 public:
  using Error::Error;
};

/// Scenario text could not be parsed. Carries the 1-based line number (0 when not line-specific).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownKeyError : public ParseError {
 public:
  UnknownKeyError(std::size_t line, const std::string& key)
      : ParseError(line, "unknown key '" + key + "'"), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace seis

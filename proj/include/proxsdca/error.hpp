#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace proxsdca {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A dual point outside the domain of some conjugate.
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedNormPair : public Error {
 public:
  using Error::Error;
};

class UnsupportedOption : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised when a run observes a dual decrease beyond tolerance.
class TraceError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace proxsdca

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lingauss {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: shape mismatch, non-finite entries, bad arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation precondition (e.g. starting a chain outside the domain).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Failures of the numerical pipeline itself. The CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class CholeskyError : public NumericalError {
 public:
  // `minor` is the 1-based order of the first leading minor that is not positive.
  CholeskyError(std::size_t minor, const std::string& what)
      : NumericalError(what), minor_(minor) {}
  std::size_t minor() const noexcept { return minor_; }

 private:
  std::size_t minor_;
};

// Subset simulation made no progress at `level`.
class StallError : public NumericalError {
 public:
  StallError(std::size_t level, const std::string& what)
      : NumericalError(what), level_(level) {}
  std::size_t level() const noexcept { return level_; }

 private:
  std::size_t level_;
};

// An HDR level found no samples inside the next nested domain.
class ZeroCountError : public NumericalError {
 public:
  ZeroCountError(std::size_t level, const std::string& what)
      : NumericalError(what), level_(level) {}
  std::size_t level() const noexcept { return level_; }

 private:
  std::size_t level_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace lingauss

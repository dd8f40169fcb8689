#pragma once

#include <stdexcept>
#include <string>

namespace coxsplit {

// Argument outside the mathematical domain of a function (non-finite input,
// probability outside (0,1), negative e-value, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Structurally invalid configuration or input (bad ExperimentConfig, empty
// list where a nonempty one is required, malformed file).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical procedure failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double error_estimate)
      : std::runtime_error(what), error_estimate_(error_estimate) {}

  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

// Exhaustive enumeration requested beyond the combination budget.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double combinations)
      : std::runtime_error(what), combinations_(combinations) {}

  double combinations() const noexcept { return combinations_; }

 private:
  double combinations_;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::string path)
      : std::runtime_error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace coxsplit

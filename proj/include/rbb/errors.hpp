#pragma once

#include <stdexcept>
#include <string>

namespace rbb {

/// Argument outside the domain where a density or law is defined.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Malformed input: grids, configs, observation files.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// The observation has zero likelihood under the model.
class InferenceError : public std::runtime_error {
 public:
  explicit InferenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Quadrature failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Monte-Carlo estimator could not be formed (e.g. too few matched samples).
class StatisticalError : public std::runtime_error {
 public:
  explicit StatisticalError(const std::string& what) : std::runtime_error(what) {}
};

/// Hypotheses of an operation are not met.
class PreconditionError : public std::logic_error {
 public:
  explicit PreconditionError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace rbb

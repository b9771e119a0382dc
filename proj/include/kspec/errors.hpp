#pragma once

#include <stdexcept>
#include <string>

namespace kspec {

/// Malformed or out-of-contract arguments (dimension mismatch, empty samples, bad labels).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine hit a state it cannot recover from.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested more components than the operator's numerical rank supports.
class RankDeficiencyError : public NumericalError {
 public:
  RankDeficiencyError(const std::string& what, int achievable_rank)
      : NumericalError(what), achievable_rank_(achievable_rank) {}

  int achievable_rank() const noexcept { return achievable_rank_; }

 private:
  int achievable_rank_;
};

/// Cross-view moment matrix is singular; the views are not correlated enough.
class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Every power-iteration restart collapsed to a zero update.
class DegenerateTensorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A recovered component has a vanishing eigenvalue or weight.
class ComponentDegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace kspec

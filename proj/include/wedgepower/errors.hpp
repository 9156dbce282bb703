#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wedgepower {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameter set that is syntactically fine but yields an impossible model
/// (negative variance component, non-PSD covariance, rank-deficient X, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ValidationIssue {
  std::string path;
  std::string message;
};

/// Carries every problem found while validating a design or spec document.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);

  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

}  // namespace wedgepower

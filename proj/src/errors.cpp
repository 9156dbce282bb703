#include "wedgepower/errors.hpp"

#include <sstream>

namespace wedgepower {

namespace {

std::string summarize(const std::vector<ValidationIssue>& issues) {
  std::ostringstream out;
  out << issues.size() << " validation issue" << (issues.size() == 1 ? "" : "s");
  for (const auto& issue : issues) {
    out << "\n  " << issue.path << ": " << issue.message;
  }
  return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(summarize(issues)), issues_(std::move(issues)) {}

}  // namespace wedgepower

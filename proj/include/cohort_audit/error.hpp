#pragma once

#include <stdexcept>
#include <string>

namespace cohort_audit {

// Input data or arguments violate a contract. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A configuration that cannot be satisfied on the given data. Exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cohort_audit

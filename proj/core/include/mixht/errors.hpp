#pragma once

#include <stdexcept>
#include <string>

namespace mixht {

// Arithmetic on extended reals that has no defined value (inf - inf, 0 * inf).
class IndeterminateForm : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A modelling assumption the caller relied on does not hold for the instance.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Enumeration would exceed the configured state-space guard.
class GuardExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A named numerical check inside a multi-step computation failed.
class CheckFailed : public std::runtime_error {
 public:
  CheckFailed(std::string check, const std::string& detail)
      : std::runtime_error(check + ": " + detail), check_(std::move(check)) {}
  const std::string& check() const noexcept { return check_; }

 private:
  std::string check_;
};

}  // namespace mixht

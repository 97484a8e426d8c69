#pragma once

#include <stdexcept>
#include <string>

namespace coinflip {

// Argument arity does not match the function or measure it is used with.
class ArityMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A parameter lies outside its documented domain (t = 0, bad index, bad bias...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exact enumeration would exceed the configured work budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A search was invoked outside the regime its construction requires.
class PreconditionViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A schedule parameter came out non-positive or non-finite.
class OutOfRegime : public std::runtime_error {
 public:
  OutOfRegime(const std::string& parameter, const std::string& detail)
      : std::runtime_error("out-of-regime: " + parameter + " " + detail), parameter_(parameter) {}
  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

}  // namespace coinflip

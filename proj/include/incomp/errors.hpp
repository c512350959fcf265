#pragma once

#include <stdexcept>
#include <string>

namespace incomp {

// Scenario document does not match the schema, or violates a topology /
// policy invariant.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A slot decision broke the link-capacity, computation-capacity or tag
// matching constraints. Policies must never trigger this.
class ConstraintViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LpDegeneracyError : public std::runtime_error {
 public:
  LpDegeneracyError(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial() const noexcept { return partial_; }

 private:
  double partial_;
};

class InstanceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ScenarioMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace incomp

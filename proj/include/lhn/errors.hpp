#pragma once

#include <stdexcept>
#include <string>

namespace lhn {

// Base for everything the library throws on bad input or failed preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file or JSON document.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Files that parse but belong to different groups or schemes.
class BackendMismatch : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

// A group or key could not be built from the requested data.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

class KeygenError : public Error {
 public:
  KeygenError(std::string requirement, const std::string& what)
      : Error(what), requirement_(std::move(requirement)) {}
  const std::string& requirement() const { return requirement_; }

 private:
  std::string requirement_;
};

// One of the attack assumptions (A1..A4, or a structural precondition) does
// not hold on the instance at hand. The label names the assumption.
class AssumptionFailure : public Error {
 public:
  AssumptionFailure(std::string label, const std::string& what)
      : Error(label + ": " + what), label_(std::move(label)) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

// The solver would need more group operations than the caller allowed.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(unsigned long long needed, unsigned long long budget,
                 const std::string& what)
      : Error(what), needed_(needed), budget_(budget) {}
  unsigned long long needed() const { return needed_; }
  unsigned long long budget() const { return budget_; }

 private:
  unsigned long long needed_;
  unsigned long long budget_;
};

// The request is outside what a classical desk-scale emulation will attempt.
class Refusal : public Error {
 public:
  using Error::Error;
};

}  // namespace lhn

#pragma once

#include <stdexcept>
#include <string>

namespace agetrack {

// Invalid user configuration: unknown scenario, bad dial, incompatible event.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reference to an entity (fact, lineage, accumulator) that does not exist.
class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed serialized document.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition on an otherwise well-formed request.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure of an agent or summarizer backend; aborts the current run.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace agetrack

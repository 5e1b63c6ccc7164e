#pragma once

#include <stdexcept>
#include <string>

namespace dsmps {

// Argument outside the domain of a function or a violated precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Scene or configuration that violates a documented invariant.
class InvalidScene : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure inside a solver (singular system, non-convergence, ...).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable input/output file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File that cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dsmps

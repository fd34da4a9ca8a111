#pragma once

#include <stdexcept>
#include <string>

namespace sog {

// Out-of-range or inconsistent arguments (CLI exit code 1).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A model assumption (moment or support condition) does not hold (exit code 1).
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The sample contains too few regeneration points/cycles to estimate anything (exit code 2).
class DegenerateSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPathError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Brute-force routines refuse inputs above their size guard.
class GuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class GridMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed text input: distribution specs, config files, JSON documents.
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sog

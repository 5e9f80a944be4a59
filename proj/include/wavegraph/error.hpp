#pragma once

#include <stdexcept>
#include <string>

namespace wavegraph {

/// Malformed or out-of-contract input (shape mismatch, disconnected graph, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad data on disk or in a file format.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, singular systems and other numerical breakdowns.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wavegraph

#pragma once

#include <stdexcept>
#include <string>

namespace metatpe {

// A value lies outside its parameter domain, or a unit coordinate is out of range.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Objective vectors of mismatched dimension were mixed in one computation.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An operation was requested in the wrong optimizer phase.
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

// A benchmark or dataset file violates its schema.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact-match lookup failed on a tabular benchmark.
struct MissingRecordError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The operation is only defined for a smaller number of objectives.
struct UnsupportedDimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace metatpe

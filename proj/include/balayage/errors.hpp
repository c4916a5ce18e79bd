#pragma once

#include <stdexcept>

namespace balayage {

// invalid structure: overlapping balls, mismatched dimensions, bad partitions
struct StructuralError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// invalid numeric input: tolerances, kernel indices, points outside domains
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// an iterative solve or escalation failed to reach its target within budget
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace balayage

#pragma once

#include <stdexcept>

namespace altdiff {

// Operand sizes or geometries do not agree.
struct dimension_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A defining vector that would collapse the alternative sum onto XOR.
struct degenerate_operation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed text input (matrices, hex words, descriptors, spec files).
struct parse_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Request exceeds what the exhaustive routines are sized for.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A required algebraic property failed to hold.
struct verification_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace altdiff

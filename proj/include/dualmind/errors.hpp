#pragma once

#include <stdexcept>
#include <string>

namespace dualmind {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rank/dimension mismatches (matmul shapes, concat rank, flat-vector length).
struct ShapeError : Error {
    using Error::Error;
};

// Out-of-range class index or unknown agent lookup.
struct IndexError : Error {
    using Error::Error;
};

// NaN/inf where a finite value is required (softmax inputs, training loss).
struct NumericError : Error {
    using Error::Error;
};

// API used in the wrong order (Adam step without grads, phase 2 before phase 1).
struct StateError : Error {
    using Error::Error;
};

// Backward invoked on a tensor that the given tape did not produce.
struct TapeError : Error {
    using Error::Error;
};

// Bad user-facing input: malformed adjacency, unknown curriculum/variant name,
// non-boolean cue under boolean semantics.
struct ValidationError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace dualmind

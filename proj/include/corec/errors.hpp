#pragma once

#include <stdexcept>
#include <string>

namespace corec {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible matrix shapes.
struct DimensionError : Error {
  using Error::Error;
};

// LU elimination hit a pivot below the admissible magnitude.
struct SingularMatrixError : Error {
  int pivot_index;
  SingularMatrixError(const std::string& msg, int pivot)
      : Error(msg), pivot_index(pivot) {}
};

// Principal-logarithm chart failure: an eigenvalue sits on the closed
// negative real axis (within tolerance), so no principal branch exists.
struct BranchCutError : Error {
  using Error::Error;
};

// Element/group or point/target kind mismatch.
struct KindMismatchError : Error {
  using Error::Error;
};

// A Cayley table failed the group axioms; the message names the witness.
struct GroupAxiomError : Error {
  using Error::Error;
};

// An operation precondition was violated by the caller.
struct PreconditionError : Error {
  using Error::Error;
};

// Malformed input file (scenario, cochain table, Cayley table).
struct FormatError : Error {
  using Error::Error;
};

}  // namespace corec

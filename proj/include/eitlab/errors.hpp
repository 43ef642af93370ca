#pragma once

#include <stdexcept>
#include <string>

namespace eitlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable tag, written into report rows.
  virtual const char* kind() const noexcept { return "error"; }
};

#define EITLAB_DEFINE_ERROR(Name, tag)                       \
  class Name : public Error {                                \
   public:                                                   \
    using Error::Error;                                      \
    const char* kind() const noexcept override { return tag; } \
  }

EITLAB_DEFINE_ERROR(InvalidArgument, "invalid-argument");
EITLAB_DEFINE_ERROR(EllipticityViolation, "ellipticity-violation");
EITLAB_DEFINE_ERROR(SolverFailure, "solver-failure");
EITLAB_DEFINE_ERROR(BasisRankError, "basis-rank");
EITLAB_DEFINE_ERROR(ConsistencyError, "internal-consistency");
EITLAB_DEFINE_ERROR(PreconditionError, "precondition");
EITLAB_DEFINE_ERROR(DegeneratePair, "degenerate-pair");
EITLAB_DEFINE_ERROR(DivergenceError, "divergence");
EITLAB_DEFINE_ERROR(EstimationError, "estimation");
EITLAB_DEFINE_ERROR(ConfigError, "config");

#undef EITLAB_DEFINE_ERROR

}  // namespace eitlab

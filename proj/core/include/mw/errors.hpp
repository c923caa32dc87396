#ifndef MW_ERRORS_HPP
#define MW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mw {

// Base of all library errors. ValidationError covers bad inputs and file
// format problems (CLI exit code 2); NumericalError covers failures of the
// numerics themselves (CLI exit code 3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct IoError : ValidationError {
  using ValidationError::ValidationError;
};

struct DomainError : ValidationError {
  using ValidationError::ValidationError;
};

struct ShapeMismatchError : ValidationError {
  using ValidationError::ValidationError;
};

struct GeometryError : ValidationError {
  using ValidationError::ValidationError;
};

struct EmptyWindowError : ValidationError {
  using ValidationError::ValidationError;
};

struct DegenerateWindowError : ValidationError {
  using ValidationError::ValidationError;
};

struct DegenerateFieldError : ValidationError {
  using ValidationError::ValidationError;
};

struct CapExceededError : ValidationError {
  using ValidationError::ValidationError;
};

struct InsufficientDataError : ValidationError {
  using ValidationError::ValidationError;
};

struct UnsupportedCaseError : ValidationError {
  using ValidationError::ValidationError;
};

struct NonConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

struct PoleError : ValidationError {
  using ValidationError::ValidationError;
};

struct EmbeddingError : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularFisherError : NumericalError {
  using NumericalError::NumericalError;
};

struct OptimizerDivergenceError : NumericalError {
  using NumericalError::NumericalError;
};

struct NegativityError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace mw

#endif

#pragma once

#include <stdexcept>
#include <string>

namespace tcsim {

// Common base so callers can catch the whole toolkit family at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape / construction problems.
struct DimensionMismatch : Error {
  using Error::Error;
};
struct LabelOutOfRange : Error {
  using Error::Error;
};

// Numerical preconditions.
struct NotHermitian : Error {
  using Error::Error;
};
struct NotUnitary : Error {
  using Error::Error;
};
struct Singular : Error {
  using Error::Error;
};
struct StepTooLarge : Error {
  using Error::Error;
};

// Register / mode misuse.
struct WrongMode : Error {
  using Error::Error;
};
struct AncillaBudgetExceeded : Error {
  using Error::Error;
};
struct RegisterTooLarge : Error {
  using Error::Error;
};

// Model restrictions.
struct UnsupportedQ : Error {
  using Error::Error;
};
struct UnsupportedCavitySize : Error {
  using Error::Error;
};

// Estimator degeneracies.
struct EmptyEnsemble : Error {
  using Error::Error;
};
struct ZeroDenominator : Error {
  using Error::Error;
};
struct AllBatchesDegenerate : Error {
  using Error::Error;
};

// Scenario-runner failures.
struct ConfigInvalid : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

// Raised when a runtime self-check (trace drift, norm loss, ...) trips;
// the command-line runner maps this family to exit code 3.
struct NumericalCheckFailed : Error {
  using Error::Error;
};

}  // namespace tcsim

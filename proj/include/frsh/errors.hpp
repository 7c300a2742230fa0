#pragma once

#include <stdexcept>
#include <string>

namespace frsh {

// Base for everything this library throws deliberately.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape/size/grid mismatches between inputs.
struct StructuralError : Error {
  using Error::Error;
};

// Parameter outside its admissible range (alpha, R, ...).
struct DomainError : Error {
  using Error::Error;
};

// A dyadic rescale would push spectral content beyond what the target
// lattice can hold, or the frame grids are not scale-matched.
struct ResolutionError : Error {
  using Error::Error;
};

// Requested dyadic band has no lattice points.
struct EmptyBandError : Error {
  using Error::Error;
};

// Fixed-point iteration failed to contract; message carries diagnostics.
struct NoConvergenceError : Error {
  using Error::Error;
};

// Bisection endpoints do not bracket a verdict change.
struct BracketError : Error {
  using Error::Error;
};

// Concentration-scan schedule violates the vanishing-ratio condition.
struct ScheduleError : Error {
  using Error::Error;
};

// Data-generator could not satisfy a requested property (carries a table).
struct ParameterError : Error {
  using Error::Error;
};

// Config file problems; message names the offending key.
struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace frsh

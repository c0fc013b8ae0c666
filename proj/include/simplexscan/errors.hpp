#pragma once

#include <stdexcept>
#include <string>

namespace simplexscan {

// Common base so callers can catch everything the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// simplex validation
struct DegenerateSimplex : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// samplers
struct DegeneratePrior : Error { using Error::Error; };

// grid sets
struct InfeasibleDensity : Error { using Error::Error; };

// counting forms
struct BadScale : Error { using Error::Error; };

// dyadic structured bound
struct ResolutionTooCoarse : Error { using Error::Error; };

// singular integral probes
struct BadSpec : Error { using Error::Error; };
struct BadWindow : Error { using Error::Error; };

// scan engine
struct BadDelta : Error { using Error::Error; };
struct ScaleTooLarge : Error { using Error::Error; };

// experiment runner
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace simplexscan

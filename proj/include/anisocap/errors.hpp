#pragma once

#include <stdexcept>

namespace anisocap {

// Common base so callers can catch library failures in one place.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// norm construction / evaluation
struct InvalidSpec : Error { using Error::Error; };
struct EllipticityViolation : Error { using Error::Error; };
struct ZeroDirection : Error { using Error::Error; };

// grid / surface construction
struct InvalidGrid : Error { using Error::Error; };
struct NonPositiveRadius : Error { using Error::Error; };
struct DegenerateMetric : Error { using Error::Error; };

// flow
struct MeanConvexityLost : Error { using Error::Error; };
struct StepLimitExceeded : Error { using Error::Error; };

// functionals
struct InvalidExponent : Error { using Error::Error; };
struct HypothesisViolation : Error { using Error::Error; };
struct NotConvex : Error { using Error::Error; };
struct NonPositiveSupport : Error { using Error::Error; };
struct PositiveHawkingMass : Error { using Error::Error; };
struct NonPositiveUpperLimit : Error { using Error::Error; };
struct DegenerateDenominator : Error { using Error::Error; };

// pde checks
struct CriticalPoint : Error { using Error::Error; };
struct LevelSetNotFound : Error { using Error::Error; };

// config / cli
struct ConfigError : Error { using Error::Error; };

}  // namespace anisocap

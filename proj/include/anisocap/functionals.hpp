#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "anisocap/surface.hpp"

namespace anisocap {

// Capacity bounds for star-shaped bodies in R^3.  Every "upper" here bounds
// the anisotropic p-capacity of the enclosed body from above, every "lower"
// from below; on scaled Wulff shapes all of them collapse to the same exact
// value, which is what wulff_capacity_exact returns.  Each bound carries its
// own hypotheses (mean convexity, convexity, ...); the evaluators throw when
// a hypothesis is checkable and fails, and bounds_report converts those
// throws into absent entries instead.

// sqrt(|Sigma|_F / (4 |dW|_F)) * (1 - integral(H_F^2 dmu_F) / (4 |dW|_F)).
// Nonpositive for embedded surfaces, zero exactly on scaled Wulff shapes,
// and scales like a length: m(t Sigma) = t m(Sigma).
double hawking_mass(const RadialSurface& surface, const NormModel& norm);

// integral(H_F^2 dmu_F), bounded below by 4 |dW|_F for embedded surfaces
// with equality only on scaled Wulff shapes.
double willmore_energy(const RadialSurface& surface, const NormModel& norm);

// Upper bound ((p-1)(n-1)/(n-p))^{1-p} integral(H_F^{p-1} dmu_F), n = 3.
// Requires 2 <= p < 3 and an F-mean convex surface.
// Throws InvalidExponent, HypothesisViolation (H_F <= 0 somewhere).
double curvature_integral_bound(const RadialSurface& surface,
                                const NormModel& norm, double p);

// Interpolated variant for 1 < p <= 2 <= q < 3:
// ((p-1)(n-1)/(n-p))^{1-p} (integral(H_F^{q-1} dmu_F))^{(p-1)/(q-1)}
//   * |dK|_F^{(q-p)/(q-1)}.
// Collapses to curvature_integral_bound when p = q = 2 (same code path).
double curvature_interpolation_bound(const RadialSurface& surface,
                                     const NormModel& norm, double p,
                                     double q);

// integral over [0, (E-1)^{(3-p)/(p-1)}] of (1 + r^{(p-1)/(3-p)})^{-1/2} dr,
// the time-profile factor of the Hawking-mass capacity bound.  Adaptive
// quadrature to absolute tolerance 1e-10; closed form 2 (sqrt(E) - 1) at
// p = 2.  Throws InvalidExponent, NonPositiveUpperLimit (E <= 1).
double hawking_profile_integral(double E, double p);

// Upper bound driven by the Hawking mass, 1 < p < 3.  Within the zero band
// |m| <= 1e-6 sqrt(|Sigma|_F) it returns the scaled-Wulff value
// ((3-p)/(p-1))^{p-1} |dW|_F r0^{3-p} with r0 = sqrt(|Sigma|_F / |dW|_F);
// for m below the band,
// ((3-p)/(p-1))^{p-1} |dW|_F^{(p-1)/2} |Sigma|_F^{(3-p)/2} (E-1)^{3-p}
//   * hawking_profile_integral(E, p)^{1-p} with E the Willmore ratio
// integral(H_F^2 dmu_F) / (4 |dW|_F).  A mass above the band signals a
// broken input (embedded surfaces cannot reach it): PositiveHawkingMass.
double hawking_mass_bound(const RadialSurface& surface, const NormModel& norm,
                          double p);

// The p = 2 closed form of hawking_mass_bound:
// (1/2) sqrt(|dW|_F |Sigma|_F) (1 + sqrt(E)).  Agrees with
// hawking_mass_bound(. , . , 2) exactly whenever the mass is out of band.
double hawking_mass_bound_p2(const RadialSurface& surface,
                             const NormModel& norm);

// integral over [0, inf) of (c[0] + c[1] t + c[2] t^2)^{1/(1-p)} dt for a
// positive-coefficient quadratic; finite for 1 < p < 3.  Adaptive panels out
// to the point where the t^2 term dominates by 1e6, then a power-law tail.
double quadratic_decay_integral(const Eigen::Vector3d& c, double p);

// Same integral at p = 2, where it is log((1+eps)/(1-eps)) / (c[1] eps)
// with eps = sqrt(1 - 4 c[2] c[0] / c[1]^2), evaluated by series below
// eps = 1e-4.
double quadratic_decay_integral_p2(const Eigen::Vector3d& c);

// Upper bound for convex surfaces from the unit-speed normal foliation:
// quadratic_decay_integral(normal_flow_Tp_coeffs, p)^{1-p}, with the closed
// form used at p = 2.  Throws NotConvex, InvalidExponent.
double normal_flow_bound(const RadialSurface& surface, const NormModel& norm,
                         double p);

// Upper bound for surfaces star-shaped about the origin:
// ((3-p)/(p-1))^{p-1} integral(h_F^{1-p} dmu_F).
// Throws InvalidExponent, NonPositiveSupport.
double homothety_bound(const RadialSurface& surface, const NormModel& norm,
                       double p);

// Lower bound from the anisotropic perimeter and the enclosed volume,
// (B / (A - volume))^{p-1} with
// A = p(n-1)/(n(n-p)) area_F^{n/(n-1)} |dW|_F^{1/(1-n)} and
// B = area_F^{p/(p-1)}.  Sharp for convex bodies; evaluated on the given
// scalars regardless, so star-shaped inputs can be surveyed too.
// Throws InvalidExponent, DegenerateDenominator (A <= volume, which valid
// convex inputs cannot produce).
double perimeter_volume_lower(double area_F, double volume,
                              const NormModel& norm, double p, int n = 3);

// Lower bound n |W|^{p/n} ((n-p)/(p-1))^{p-1} volume^{(n-p)/n}; equality on
// Wulff balls.  Throws InvalidExponent, InvalidSpec (volume <= 0).
double isocapacitary_lower(double volume, const NormModel& norm, double p,
                           int n = 3);

// |dK|_F - n |W|^{1/n} volume^{(n-1)/n} on the surface's own grid (n = 3).
// Nonnegative up to quadrature error; zero exactly on scaled Wulff shapes;
// scales like area: defect(t K) = t^2 defect(K).
double isoperimetric_defect(const RadialSurface& surface,
                            const NormModel& norm);

// ((n-p)/(p-1))^{p-1} |dW|_F r0^{n-p}: the capacity of the scaled Wulff
// ball r0 W, the shared equality case of every bound above.  |dW|_F is the
// closed form when the norm has one and a fixed internal quadrature
// otherwise; n enters the arithmetic only (the norm stays 3-dimensional).
// Throws InvalidExponent, InvalidSpec (r0 <= 0).
double wulff_capacity_exact(const NormModel& norm, double p, double r0,
                            int n = 3);

// Every bound of this header evaluated on one body, plus the shared
// descriptors and the invariant checks.  Bounds whose hypotheses fail are
// absent rather than fatal.  `oracle` holds wulff_capacity_exact when the
// body is detected to be a scaled Wulff shape of the norm (radius field a
// constant multiple of the Wulff gauge to 1e-9).
struct BoundsReport {
  double volume = 0.0;        // |K|
  double area_F = 0.0;        // |dK|_F
  double wulff_area = 0.0;    // |dW|_F on the body's grid
  double wulff_volume = 0.0;  // |W|
  double p = 2.0;
  double q = 2.0;             // companion exponent of curvature_pq

  double hawking = 0.0;
  double willmore = 0.0;
  double isoperimetric = 0.0;  // isoperimetric_defect

  bool mean_convex = false;  // min H_F > 0
  bool convex = false;       // all sampled principal curvatures >= -slack

  std::optional<double> curvature;     // upper; needs mean_convex, p >= 2
  std::optional<double> curvature_pq;  // upper; needs mean_convex, p <= 2
  std::optional<double> hawking_bound; // upper; needs mean_convex
  std::optional<double> hawking_p2;    // upper; needs mean_convex
  std::optional<double> normal_flow;   // upper; needs convex
  std::optional<double> homothety;     // upper
  std::optional<double> perimeter_volume;  // lower; sharp only when convex
  double isocapacitary = 0.0;              // lower
  std::optional<double> oracle;

  // Invariant flags.  `sandwich` compares the present lower bounds whose
  // hypotheses hold against all present upper bounds with 0.5% slack.
  bool hawking_nonpositive = false;
  bool willmore_at_least_wulff = false;
  bool isoperimetric_nonneg = false;
  bool sandwich = false;
};

// Evaluate everything on one surface.  q feeds curvature_interpolation_bound
// and must lie in [2, 3).  Throws InvalidExponent for p outside (1, 3);
// per-bound hypothesis failures are recorded as absent entries.
BoundsReport bounds_report(const RadialSurface& surface, const NormModel& norm,
                           double p, double q = 2.0);

// JSON object with a fixed key order; byte-identical for identical reports.
std::string report_json(const BoundsReport& report);

// Fixed-width human-readable table.
std::string report_table(const BoundsReport& report);

}  // namespace anisocap

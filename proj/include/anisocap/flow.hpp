#pragma once

#include <Eigen/Dense>
#include <vector>

#include "anisocap/surface.hpp"

namespace anisocap {

// Inverse anisotropic mean curvature flow, speed F(nu)/H_F along the outward
// normal, run as a scalar PDE for rho = log r on the sphere grid.

struct FlowControls {
  double t_end = 2.0;
  double cfl = 0.2;             // fraction of the explicit stability limit
  long max_steps = 500000;
  double snapshot_every = 0.05; // trace cadence in flow time
  double min_HF = 1e-8;         // abort threshold for F-mean convexity

  bool operator==(const FlowControls&) const = default;
};

// One trace record.  T_p holds one integral per entry of FlowTrace::p_list.
struct FlowSample {
  double t = 0.0;
  double area_F = 0.0;               // |Sigma_t|_F
  std::vector<double> T_p;           // integral of H_F^{p-1} dmu_F
  double hawking = 0.0;              // anisotropic Hawking mass
  double shape_dev = 0.0;            // sup |r F0(p) / rbar - 1|
  double min_HF = 0.0;
};

struct FlowTrace {
  std::vector<double> p_list;
  std::vector<double> times;           // strictly increasing, starts at 0
  std::vector<FlowSample> samples;     // aligned with times
  std::vector<RadialSurface> surfaces; // snapshots, aligned with times
  long steps = 0;                      // accepted time steps
};

// d(rho)/dt per node: F(nu) sqrt(1 + |grad rho|^2) / (r H_F).
// Throws MeanConvexityLost if H_F <= min_HF anywhere.
Eigen::ArrayXd iamcf_rhs(const RadialSurface& surface, const NormModel& norm,
                         double min_HF = 1e-8);

// Integrate the flow to controls.t_end, recording a sample every
// controls.snapshot_every (plus t = 0 and t = t_end exactly).
//
// Stepping is Heun (two-stage explicit Runge-Kutta) on the right-hand side
// minus a per-row azimuthal diffusion operator, which is advanced by exact
// circulant solves instead.  The split costs nothing in consistency (the
// operator is subtracted where it is added) and removes the 1/sin^2(theta)
// azimuthal stiffness near the poles, so dt is set by the colatitude
// resolution alone: dt = cfl * 2 / max_node(D * S_theta) with D the
// diffusive scale F(nu) a_max / (r H_F)^2 of the linearized flow and
// S_theta the symbol bound of the second colatitude derivative.  Homothetic
// expansion from a scaled Wulff shape is reproduced exactly because the
// azimuthal operator annihilates the expansion mode.
FlowTrace run_iamcf(const RadialSurface& surface, const NormModel& norm,
                    const FlowControls& controls,
                    const std::vector<double>& p_list);

// Upper capacity estimate from a recorded trace: composite trapezoid of
// T_p^{-1/(p-1)} over the snapshot times plus the closed-form tail with
// T_p extrapolated at the growth rate (n-p)/(n-1) that is exact on Wulff
// shapes; returns the (1-p)-th power of the total.  p must have been
// recorded in the trace.
double capacity_upper_from_trace(const FlowTrace& trace, double p, int n = 3);

// Coefficients of T_p(t) under the unit-speed anisotropic normal flow
// X_t = nu_F, which is polynomial in t for convex starts:
// (area_F, integral of H_F dmu_F, integral of K_F dmu_F).
Eigen::Vector3d normal_flow_Tp_coeffs(const RadialSurface& surface,
                                      const NormModel& norm);

// Coefficient of the homothety foliation's T_p(t) = (1+t)^{n-1} * c:
// c = integral of h_F^{1-p} dmu_F.  Requires anisotropic support h_F > 0.
double homothety_Tp_coeff(const RadialSurface& surface, const NormModel& norm,
                          double p);

}  // namespace anisocap

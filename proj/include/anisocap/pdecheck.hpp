#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "anisocap/errors.hpp"
#include "anisocap/norms.hpp"
#include "anisocap/surface.hpp"

namespace anisocap {

// Scalar field on R^dim given by a deterministic point evaluator, valid away
// from a stated singular set (typically the origin for the potentials below).
struct ScalarField {
  int dim = 3;
  std::function<double(const Eigen::VectorXd&)> eval;

  double operator()(const Eigen::VectorXd& x) const { return eval(x); }
  double operator()(const Eigen::Vector3d& x) const {
    return eval(Eigen::VectorXd(x));
  }
};

// Radial candidate potential u(x) = (F0(x)/r0)^{-(n-p)/(p-1)}: equal to 1 on
// the scaled Wulff shape F0 = r0 and decaying to 0 at infinity.  n must match
// the norm's dimension, since the decay exponent is tied to the ambient space
// the p-Laplacian acts in.  Throws InvalidExponent (p outside (1, n)) and
// InvalidSpec (r0 <= 0 or dimension mismatch).
ScalarField wulff_potential(const NormModel& norm, double r0, double p,
                            int n = 3);

// Fourth-order central differences with absolute step h > 0.  The mixed
// second derivatives come from applying the four-point first-derivative
// stencil along both axes, so every entry carries O(h^4) truncation.
// Throws InvalidSpec (bad step or dimension mismatch).
Eigen::VectorXd fd_gradient(const ScalarField& field, const Eigen::VectorXd& x,
                            double h);
Eigen::MatrixXd fd_hessian(const ScalarField& field, const Eigen::VectorXd& x,
                           double h);

// Anisotropic p-Laplacian residual at x:
//   F^{p-2}(Du) * (F(Du) F_ij(Du) + (p-1) F_i(Du) F_j(Du)) u_ij
// with Du and D2u assembled by the fourth-order differences above.  The
// operator degenerates at critical points, so |Du| below 1e-8 * |u(x)|/|x|
// (or an exactly vanishing gradient) throws CriticalPoint.
double anisotropic_p_laplacian(const NormModel& norm, const ScalarField& field,
                               const Eigen::VectorXd& x, double p, double h);

// One residual evaluation of a survey: the sample point, the relative step
// (the absolute step used is h_rel * |x|), and the residual value.
struct ResidualSample {
  Eigen::VectorXd x;
  double h_rel = 0.0;
  double residual = 0.0;
};

// Evaluates the residual at every (point, relative step) pair, points outer,
// steps inner.  Parallel over samples; output order is fixed by index.
std::vector<ResidualSample> residual_survey(
    const NormModel& norm, const ScalarField& field,
    const std::vector<Eigen::VectorXd>& points, double p,
    const std::vector<double>& h_rels);

// Largest |residual| among the samples taken at the given relative step.
double max_residual(const std::vector<ResidualSample>& samples, double h_rel);

// CSV serialization: coordinate columns, then h, then residual; one header
// row; '.' decimal separator; %.17g values so reports are byte-stable.
std::string residual_csv(const std::vector<ResidualSample>& samples);

// Deterministic quasi-uniform sample points on the dual-gauge shells
// F0(x) = s for count values of s interpolating [s_lo, s_hi] geometrically.
// Throws InvalidSpec (count <= 0 or shell radii not 0 < s_lo <= s_hi).
std::vector<Eigen::VectorXd> shell_points(const NormModel& norm, int count,
                                          double s_lo, double s_hi);

// Capacity by the flux integral over one level set: locates the level
// radially per grid direction (bisection to 1e-12 relative), then integrates
// F^p(Du)/|Du| against the Euclidean area element of the located surface.
// Valid for fields whose level sets are star-shaped about the origin.
// Throws InvalidSpec (level outside (0,1) or non-3d field), LevelSetNotFound,
// CriticalPoint (vanishing gradient on the level set).
double flux_capacity(const NormModel& norm, const ScalarField& field, double p,
                     double level, const SphereGrid& grid);

}  // namespace anisocap

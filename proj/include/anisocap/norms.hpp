#pragma once

#include <Eigen/Dense>
#include <vector>

#include "anisocap/errors.hpp"

namespace anisocap {

// Smooth Minkowski norms F on R^n: even, positively 1-homogeneous, F > 0 away
// from the origin, with Hess(F^2/2) uniformly positive definite.  The dual
// norm is F0(x) = sup_{xi != 0} <x, xi> / F(xi); the unit ball of F0 is the
// Wulff ball W and its boundary the Wulff shape.

enum class NormFamily { Euclidean, Ellipsoidal, Quartic };

// Settings for the sampled + projected-Newton dual solver used when F0 has no
// closed form (Quartic family).  `samples` quasi-uniform directions seed a
// Newton refinement run to `tol` (step size) or `newton_iters` iterations.
struct DualSolverSettings {
  int samples = 4096;
  int newton_iters = 20;
  double tol = 1e-10;

  bool operator==(const DualSolverSettings&) const = default;
};

struct NormSpec {
  NormFamily family = NormFamily::Euclidean;
  int dimension = 3;
  Eigen::MatrixXd matrix;   // Ellipsoidal: symmetric positive definite, n x n
  double amplitude = 0.0;   // Quartic: F(xi) = |xi| (1 + a * sum_i (xi_i/|xi|)^4)
  DualSolverSettings dual;
};

bool operator==(const NormSpec& a, const NormSpec& b);
inline bool operator!=(const NormSpec& a, const NormSpec& b) { return !(a == b); }

// Immutable validated norm.  Construction samples Hess(F^2/2) over at least
// 2048 quasi-uniform directions and records the worst eigenvalue as the
// ellipticity margin; a non-positive margin rejects the spec.
class NormModel {
 public:
  const NormSpec& spec() const { return spec_; }
  NormFamily family() const { return spec_.family; }
  int dim() const { return spec_.dimension; }
  double ellipticity_margin() const { return margin_; }

  // Fixed-size caches for the n == 3 hot path (Ellipsoidal family).
  const Eigen::Matrix3d& A3() const { return A3_; }
  const Eigen::Matrix3d& Ainv3() const { return Ainv3_; }
  const Eigen::MatrixXd& A() const { return spec_.matrix; }
  const Eigen::MatrixXd& Ainv() const { return Ainv_; }

  // Seed directions (columns) and their F values for the sampled dual
  // solver; precomputed once so each solve starts with a single gemv scan.
  // Empty for families with closed-form duals.
  const Eigen::MatrixXd& dual_seeds() const { return dual_seeds_; }
  const Eigen::ArrayXd& dual_seed_F() const { return dual_seed_F_; }

 private:
  friend NormModel make_norm(const NormSpec&);
  NormModel() = default;

  NormSpec spec_;
  double margin_ = 0.0;
  Eigen::MatrixXd Ainv_;
  Eigen::Matrix3d A3_ = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d Ainv3_ = Eigen::Matrix3d::Identity();
  Eigen::MatrixXd dual_seeds_;
  Eigen::ArrayXd dual_seed_F_;
};

NormModel make_norm(const NormSpec& spec);

// Primal norm and derivatives.  grad_F is 0-homogeneous and odd, hess_F is
// (-1)-homogeneous with hess_F(xi) * xi = 0 (Euler relations).
double eval_F(const NormModel& norm, const Eigen::Vector3d& xi);
Eigen::Vector3d grad_F(const NormModel& norm, const Eigen::Vector3d& xi);
Eigen::Matrix3d hess_F(const NormModel& norm, const Eigen::Vector3d& xi);

double eval_F(const NormModel& norm, const Eigen::VectorXd& xi);
Eigen::VectorXd grad_F(const NormModel& norm, const Eigen::VectorXd& xi);
Eigen::MatrixXd hess_F(const NormModel& norm, const Eigen::VectorXd& xi);

// Dual norm.  Closed forms for Euclidean/Ellipsoidal; sampled + Newton for
// Quartic.  grad_F0(x) equals xi*/F(xi*) at the maximizing direction xi*, so
// F(grad_F0(x)) = 1 and F0(x) * grad_F(grad_F0(x)) = x.
double eval_F0(const NormModel& norm, const Eigen::Vector3d& x);
Eigen::Vector3d grad_F0(const NormModel& norm, const Eigen::Vector3d& x);
double eval_F0(const NormModel& norm, const Eigen::VectorXd& x);
Eigen::VectorXd grad_F0(const NormModel& norm, const Eigen::VectorXd& x);

// Radial function of the Wulff shape: the boundary point in direction p
// (unit) is wulff_radial(p) * p.
double wulff_radial(const NormModel& norm, const Eigen::Vector3d& p);

// F, grad_F and hess_F in one pass for a unit direction (not checked).
// This is the per-node workhorse of the surface geometry assembly.
void eval_norm_jet(const NormModel& norm, const Eigen::Vector3d& unit_dir,
                   double& f, Eigen::Vector3d& df, Eigen::Matrix3d& d2f);

// Restriction of hess_F(nu) to the tangent plane nu^perp, expressed in an
// orthonormal basis of nu^perp.  This is the curvature factor that turns the
// isotropic shape operator into the anisotropic one.  For the Euclidean norm
// it is the identity.
struct WeingartenFactor {
  Eigen::Matrix2d a;                  // symmetric positive definite
  Eigen::Matrix<double, 3, 2> basis;  // columns: orthonormal basis of nu^perp
};
WeingartenFactor anisotropic_weingarten_factor(const NormModel& norm,
                                               const Eigen::Vector3d& nu);

// Deterministic quasi-uniform unit directions (golden-spiral points on S^2).
std::vector<Eigen::Vector3d> fibonacci_directions(int count);

}  // namespace anisocap

#pragma once

#include <Eigen/Dense>

#include "anisocap/norms.hpp"
#include "anisocap/sphere_grid.hpp"

namespace anisocap {

// Closed star-shaped surface sampled over a sphere grid: the node k sits at
// X_k = r[k] * p_k with r > 0.  The grid is borrowed, not owned.
struct RadialSurface {
  const SphereGrid* grid = nullptr;
  Eigen::ArrayXd r;
};

enum class BodyKind {
  Sphere,        // round sphere of radius r0
  ScaledWulff,   // r0 * (unit Wulff shape of the norm)
  Ellipsoid,     // semi-axes (a, b, c)
  PerturbedWulff,  // wulff * (1 + eps * Y), Y a fixed low harmonic
  OffsetSphere,  // round sphere of given radius centered off the origin
};

struct RadialSpec {
  BodyKind kind = BodyKind::Sphere;
  double r0 = 1.0;                                 // Sphere, ScaledWulff
  Eigen::Vector3d semi_axes{1.0, 1.0, 1.0};        // Ellipsoid
  double eps = 0.0;                                // PerturbedWulff
  double radius = 1.0;                             // OffsetSphere
  Eigen::Vector3d center{0.0, 0.0, 0.0};           // OffsetSphere
};

bool operator==(const RadialSpec& a, const RadialSpec& b);
inline bool operator!=(const RadialSpec& a, const RadialSpec& b) {
  return !(a == b);
}

// The shape perturbation used by BodyKind::PerturbedWulff:
//   Y(p) = (3 p_z^2 - 1) / 2 + (3/4)(p_x^2 - p_y^2),  range [-5/4, 1].
double perturbation_harmonic(const Eigen::Vector3d& p);

// Radial gauge of the unit Wulff shape at every node, 1 / F0(p_k).
// Cached per (norm, grid) pair; the sampled dual solve makes this the
// single expensive field for the quartic family.
const Eigen::ArrayXd& wulff_radial_field(const NormModel& norm,
                                         const SphereGrid& grid);

RadialSurface make_surface(const SphereGrid& grid, const RadialSpec& spec,
                           const NormModel& norm);
RadialSurface surface_from_field(const SphereGrid& grid, Eigen::ArrayXd r);

// The surface borrows the grid, so building one from a temporary grid would
// leave a dangling pointer.  Force the grid to be an lvalue.
RadialSurface make_surface(SphereGrid&&, const RadialSpec&,
                           const NormModel&) = delete;
RadialSurface surface_from_field(SphereGrid&&, Eigen::ArrayXd) = delete;

// Pointwise geometry of a radial surface under a norm.  Curvatures follow
// the convention that makes the unit sphere have H_F = 2 for the Euclidean
// norm (outward normal, b_ab = -<nu, X_ab>).  The anisotropic shape
// operator is A(nu) * S with A(nu) the restriction of hess_F(nu) to the
// tangent plane; its eigenvalues kappa_F come from the symmetrized product
// A^{1/2} S A^{1/2}, so they are real even though A*S itself is not
// symmetric.
struct GeometryFields {
  Eigen::Matrix3Xd X;        // positions
  Eigen::Matrix3Xd nu;       // outward unit normal
  Eigen::Matrix3Xd nu_F;     // anisotropic normal grad_F(nu)
  Eigen::ArrayXd F_nu;       // F(nu)
  Eigen::ArrayXd J;          // area density relative to the sphere measure
  Eigen::ArrayXd dmu;        // per-node area element J * w
  Eigen::ArrayXd dmu_F;      // per-node anisotropic area element F(nu) * J * w
  Eigen::ArrayXd kappa1, kappa2;      // isotropic principal curvatures
  Eigen::ArrayXd kappa1_F, kappa2_F;  // anisotropic principal curvatures
  Eigen::ArrayXd H_F;        // kappa1_F + kappa2_F
  Eigen::ArrayXd K_F;        // kappa1_F * kappa2_F
  Eigen::ArrayXd h_F;        // anisotropic support <X, nu> / F(nu)
  Eigen::ArrayXd g11, g12, g22;  // first fundamental form in (theta, phi)
  Eigen::ArrayXd b11, b12, b22;  // second fundamental form in (theta, phi)

  // Elementary symmetric functions of (kappa1_F, kappa2_F): k = 0, 1, 2.
  Eigen::ArrayXd sigma(int k) const;
};

// Throws InvalidGrid / NonPositiveRadius unless the surface is well formed.
void check_surface(const RadialSurface& surface);

GeometryFields geometry(const RadialSurface& surface, const NormModel& norm);

// Reduced geometry for the flow right-hand side: everything needed for
// speed * nu = F(nu) / H_F and for the time-step bound.  a_max is the
// largest tangential eigenvalue of hess_F(nu), the coefficient of the
// flow's diffusive principal part.
struct MeanCurvatureFields {
  Eigen::ArrayXd H_F;
  Eigen::ArrayXd F_nu;
  Eigen::ArrayXd J;
  Eigen::ArrayXd a_max;
};

void mean_curvature_fields(const SphereGrid& grid, const Eigen::ArrayXd& r,
                           const NormModel& norm, MeanCurvatureFields& out);

enum class Measure { Dmu, DmuF };

// Fixed-order reduction sum_k integrand[k] * dmu[k] (or dmu_F[k]); the
// result does not depend on the thread count.
double integrate(const RadialSurface& surface, const GeometryFields& fields,
                 const Eigen::ArrayXd& integrand, Measure weight);

double anisotropic_area(const RadialSurface& surface, const NormModel& norm);
double enclosed_volume(const RadialSurface& surface);

// All sampled principal curvatures nonnegative up to a relative slack of
// 1e-8 * max |kappa|.
bool is_convex(const GeometryFields& fields);

// Anisotropic perimeter of the unit Wulff shape, n*|W|.  In dimension 3
// this is the radial quadrature of F0(p)^-3 over the grid; in higher
// dimensions the closed form n * omega_n * sqrt(det A) covers the Euclidean
// and ellipsoidal families (quartic has no closed form and is rejected).
double wulff_boundary_area(const NormModel& norm, const SphereGrid& grid);
// Closed form only, any dimension; throws InvalidSpec for quartic.
double wulff_boundary_area_exact(const NormModel& norm);

// Volume of the unit Wulff ball, wulff_boundary_area / n (dimension 3).
double wulff_ball_volume(const NormModel& norm, const SphereGrid& grid);

}  // namespace anisocap

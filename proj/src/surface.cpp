#include "anisocap/surface.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "anisocap/parallel.hpp"

namespace anisocap {

namespace {

// Eigenvalues of a symmetric 2x2 [[a, b], [b, c]], ascending.
inline void eig_sym2(double a, double b, double c, double& lo, double& hi) {
  const double mid = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  lo = mid - rad;
  hi = mid + rad;
}

[[noreturn]] void throw_degenerate(int node, double detg) {
  char msg[96];
  std::snprintf(msg, sizeof msg, "det g = %.3e at node %d", detg, node);
  throw DegenerateMetric(msg);
}

// Shared per-node assembly.  Full = true fills GeometryFields, otherwise the
// reduced MeanCurvatureFields used by the flow stepper.
template <bool Full>
void assemble(const SphereGrid& g, const Eigen::ArrayXd& r,
              const NormModel& norm, GeometryFields* gf,
              MeanCurvatureFields* mc) {
  const int n = g.size();
  Eigen::ArrayXd rt(n), rtt(n), rp(n), rpp(n), rtp(n);
  g.d_theta_into(r, rt);
  g.d2_theta_into(r, rtt);
  g.d_phi_into(r, rp);
  g.d2_phi_into(r, rpp);
  g.d_theta_into(rp, rtp);

  if constexpr (Full) {
    gf->X.resize(3, n);
    gf->nu.resize(3, n);
    gf->nu_F.resize(3, n);
    gf->F_nu.resize(n);
    gf->J.resize(n);
    gf->dmu.resize(n);
    gf->dmu_F.resize(n);
    gf->kappa1.resize(n);
    gf->kappa2.resize(n);
    gf->kappa1_F.resize(n);
    gf->kappa2_F.resize(n);
    gf->H_F.resize(n);
    gf->K_F.resize(n);
    gf->h_F.resize(n);
    gf->g11.resize(n);
    gf->g12.resize(n);
    gf->g22.resize(n);
    gf->b11.resize(n);
    gf->b12.resize(n);
    gf->b22.resize(n);
  } else {
    mc->H_F.resize(n);
    mc->F_nu.resize(n);
    mc->J.resize(n);
    mc->a_max.resize(n);
  }

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const double st = g.sin_theta(g.row_of(k));
    const Eigen::Vector3d p = g.p().col(k);
    const Eigen::Vector3d pt = g.p_theta().col(k);
    const Eigen::Vector3d pf = g.p_phi().col(k);

    const double rr = r[k];
    const Eigen::Vector3d X = rr * p;
    const Eigen::Vector3d Xt = rt[k] * p + rr * pt;
    const Eigen::Vector3d Xf = rp[k] * p + rr * pf;

    const double g11 = Xt.squaredNorm();
    const double g12 = Xt.dot(Xf);
    const double g22 = Xf.squaredNorm();
    const double detg = g11 * g22 - g12 * g12;
    if (!(detg > 0.0)) throw_degenerate(k, detg);
    const double ncr = std::sqrt(detg);
    const Eigen::Vector3d nu = Xt.cross(Xf) / ncr;

    const Eigen::Vector3d Xtt =
        rtt[k] * p + 2.0 * rt[k] * pt + rr * g.p_theta_theta().col(k);
    const Eigen::Vector3d Xtf = rtp[k] * p + rt[k] * pf + rp[k] * pt +
                                rr * g.p_theta_phi().col(k);
    const Eigen::Vector3d Xff =
        rpp[k] * p + 2.0 * rp[k] * pf + rr * g.p_phi_phi().col(k);
    const double b11 = -nu.dot(Xtt);
    const double b12 = -nu.dot(Xtf);
    const double b22 = -nu.dot(Xff);

    // Weingarten map g^-1 b in coordinates, then conjugated into the
    // orthonormal frame e1 = Xt/|Xt|, e2 = Gram-Schmidt complement, where
    // it is symmetric up to roundoff.
    const double w11 = (g22 * b11 - g12 * b12) / detg;
    const double w12 = (g22 * b12 - g12 * b22) / detg;
    const double w21 = (g11 * b12 - g12 * b11) / detg;
    const double w22 = (g11 * b22 - g12 * b12) / detg;
    const double s1 = std::sqrt(g11);
    const double d2 = ncr / s1;
    const double q = g12 / s1;
    const double bw11 = s1 * w11 + q * w21;
    const double bw12 = s1 * w12 + q * w22;
    const double bw21 = d2 * w21;
    const double bw22 = d2 * w22;
    const double c12 = -g12 / (g11 * d2);
    const double sf12 = bw11 * c12 + bw12 / d2;
    const double sf21 = bw21 / s1;
    const double s11 = bw11 / s1;
    const double s12 = 0.5 * (sf12 + sf21);
    const double s22 = bw21 * c12 + bw22 / d2;

    double fnu;
    Eigen::Vector3d dfnu;
    Eigen::Matrix3d d2f;
    eval_norm_jet(norm, nu, fnu, dfnu, d2f);
    const Eigen::Vector3d e1 = Xt / s1;
    const Eigen::Vector3d e2 = (Xf - (g12 / g11) * Xt) / d2;
    const Eigen::Vector3d he1 = d2f * e1;
    const double a11 = e1.dot(he1);
    const double a12 = e2.dot(he1);
    const double a22 = e2.dot(d2f * e2);
    const double HF = a11 * s11 + 2.0 * a12 * s12 + a22 * s22;

    if constexpr (Full) {
      gf->X.col(k) = X;
      gf->nu.col(k) = nu;
      gf->nu_F.col(k) = dfnu;
      gf->F_nu[k] = fnu;
      const double J = ncr / st;
      gf->J[k] = J;
      const double w = g.weights()[k];
      gf->dmu[k] = J * w;
      gf->dmu_F[k] = fnu * J * w;
      eig_sym2(s11, s12, s22, gf->kappa1[k], gf->kappa2[k]);
      // sqrt of the SPD tangential Hessian A = [[a11,a12],[a12,a22]]:
      // (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)).
      const double sA = std::sqrt(std::max(a11 * a22 - a12 * a12, 0.0));
      const double tA = std::sqrt(a11 + a22 + 2.0 * sA);
      const double r11 = (a11 + sA) / tA;
      const double r12 = a12 / tA;
      const double r22 = (a22 + sA) / tA;
      const double rs11 = r11 * s11 + r12 * s12;
      const double rs12 = r11 * s12 + r12 * s22;
      const double rs21 = r12 * s11 + r22 * s12;
      const double rs22 = r12 * s12 + r22 * s22;
      const double m11 = rs11 * r11 + rs12 * r12;
      const double m12 = rs11 * r12 + rs12 * r22;
      const double m22 = rs21 * r12 + rs22 * r22;
      eig_sym2(m11, m12, m22, gf->kappa1_F[k], gf->kappa2_F[k]);
      gf->H_F[k] = HF;
      gf->K_F[k] = gf->kappa1_F[k] * gf->kappa2_F[k];
      gf->h_F[k] = X.dot(nu) / fnu;
      gf->g11[k] = g11;
      gf->g12[k] = g12;
      gf->g22[k] = g22;
      gf->b11[k] = b11;
      gf->b12[k] = b12;
      gf->b22[k] = b22;
    } else {
      mc->H_F[k] = HF;
      mc->F_nu[k] = fnu;
      mc->J[k] = ncr / st;
      mc->a_max[k] =
          0.5 * (a11 + a22) + std::hypot(0.5 * (a11 - a22), a12);
    }
  });
}

double positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "%s must be positive, got %.3e", what, v);
    throw NonPositiveRadius(msg);
  }
  return v;
}

}  // namespace

bool operator==(const RadialSpec& a, const RadialSpec& b) {
  return a.kind == b.kind && a.r0 == b.r0 &&
         (a.semi_axes.array() == b.semi_axes.array()).all() &&
         a.eps == b.eps && a.radius == b.radius &&
         (a.center.array() == b.center.array()).all();
}

void check_surface(const RadialSurface& s) {
  if (s.grid == nullptr) throw InvalidGrid("surface without a grid");
  if (s.r.size() != s.grid->size())
    throw InvalidGrid("radial field size does not match the grid");
  if (!(s.r.minCoeff() > 0.0) || !s.r.isFinite().all())
    throw NonPositiveRadius("radial field must be positive and finite");
}

double perturbation_harmonic(const Eigen::Vector3d& p) {
  return 0.5 * (3.0 * p.z() * p.z() - 1.0) +
         0.75 * (p.x() * p.x() - p.y() * p.y());
}

const Eigen::ArrayXd& wulff_radial_field(const NormModel& norm,
                                         const SphereGrid& grid) {
  struct Entry {
    const SphereGrid* grid;
    int n_theta, n_phi;
    NormSpec spec;
    std::unique_ptr<Eigen::ArrayXd> field;
  };
  static std::mutex mu;
  static std::vector<Entry> cache;

  std::lock_guard<std::mutex> lock(mu);
  for (const Entry& e : cache) {
    if (e.grid == &grid && e.n_theta == grid.n_theta() &&
        e.n_phi == grid.n_phi() && e.spec == norm.spec())
      return *e.field;
  }
  const int n = grid.size();
  auto field = std::make_unique<Eigen::ArrayXd>(n);
  Eigen::ArrayXd& wf = *field;
  switch (norm.family()) {
    case NormFamily::Euclidean:
      wf.setOnes();
      break;
    case NormFamily::Ellipsoidal:
      for (int k = 0; k < n; ++k) {
        const Eigen::Vector3d p = grid.p().col(k);
        wf[k] = 1.0 / std::sqrt(p.dot(norm.Ainv3() * p));
      }
      break;
    case NormFamily::Quartic:
      parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
        wf[k] = wulff_radial(norm, grid.p().col(k));
      });
      break;
  }
  cache.push_back(Entry{&grid, grid.n_theta(), grid.n_phi(), norm.spec(),
                        std::move(field)});
  return *cache.back().field;
}

RadialSurface surface_from_field(const SphereGrid& grid, Eigen::ArrayXd r) {
  RadialSurface s;
  s.grid = &grid;
  s.r = std::move(r);
  check_surface(s);
  return s;
}

RadialSurface make_surface(const SphereGrid& grid, const RadialSpec& spec,
                           const NormModel& norm) {
  const int n = grid.size();
  Eigen::ArrayXd r(n);
  switch (spec.kind) {
    case BodyKind::Sphere:
      r.setConstant(positive(spec.r0, "radius"));
      break;
    case BodyKind::ScaledWulff:
      r = positive(spec.r0, "scale") * wulff_radial_field(norm, grid);
      break;
    case BodyKind::Ellipsoid: {
      for (int i = 0; i < 3; ++i) positive(spec.semi_axes[i], "semi-axis");
      const Eigen::Array3d inv2 = spec.semi_axes.array().square().inverse();
      for (int k = 0; k < n; ++k) {
        const Eigen::Vector3d p = grid.p().col(k);
        r[k] = 1.0 / std::sqrt((p.array().square() * inv2).sum());
      }
      break;
    }
    case BodyKind::PerturbedWulff: {
      const Eigen::ArrayXd& wf = wulff_radial_field(norm, grid);
      for (int k = 0; k < n; ++k)
        r[k] = wf[k] * (1.0 + spec.eps * perturbation_harmonic(grid.p().col(k)));
      break;
    }
    case BodyKind::OffsetSphere: {
      positive(spec.radius, "radius");
      const double c2 = spec.center.squaredNorm();
      if (!(c2 < spec.radius * spec.radius))
        throw NonPositiveRadius(
            "offset sphere must contain the origin (|center| < radius)");
      for (int k = 0; k < n; ++k) {
        const double d = spec.center.dot(grid.p().col(k));
        r[k] = d + std::sqrt(spec.radius * spec.radius - c2 + d * d);
      }
      break;
    }
  }
  return surface_from_field(grid, std::move(r));
}

Eigen::ArrayXd GeometryFields::sigma(int k) const {
  switch (k) {
    case 0:
      return Eigen::ArrayXd::Ones(H_F.size());
    case 1:
      return kappa1_F + kappa2_F;
    case 2:
      return K_F;
    default:
      throw Error("sigma index must be 0, 1 or 2");
  }
}

GeometryFields geometry(const RadialSurface& surface, const NormModel& norm) {
  check_surface(surface);
  GeometryFields out;
  assemble<true>(*surface.grid, surface.r, norm, &out, nullptr);
  return out;
}

void mean_curvature_fields(const SphereGrid& grid, const Eigen::ArrayXd& r,
                           const NormModel& norm, MeanCurvatureFields& out) {
  assemble<false>(grid, r, norm, nullptr, &out);
}

double integrate(const RadialSurface& surface, const GeometryFields& fields,
                 const Eigen::ArrayXd& integrand, Measure weight) {
  if (integrand.size() != surface.grid->size() ||
      fields.dmu.size() != surface.grid->size())
    throw InvalidGrid("integrand size does not match the grid");
  const Eigen::ArrayXd& m = weight == Measure::Dmu ? fields.dmu : fields.dmu_F;
  double acc = 0.0;
  for (int k = 0; k < m.size(); ++k) acc += integrand[k] * m[k];
  return acc;
}

double anisotropic_area(const RadialSurface& surface, const NormModel& norm) {
  check_surface(surface);
  MeanCurvatureFields mc;
  mean_curvature_fields(*surface.grid, surface.r, norm, mc);
  const Eigen::ArrayXd& w = surface.grid->weights();
  double acc = 0.0;
  for (int k = 0; k < w.size(); ++k) acc += mc.F_nu[k] * mc.J[k] * w[k];
  return acc;
}

double enclosed_volume(const RadialSurface& surface) {
  check_surface(surface);
  return surface.grid->integrate(surface.r.cube()) / 3.0;
}

bool is_convex(const GeometryFields& fields) {
  const double lo = std::min(fields.kappa1.minCoeff(), fields.kappa2.minCoeff());
  const double hi = std::max(fields.kappa1.abs().maxCoeff(),
                             fields.kappa2.abs().maxCoeff());
  return lo >= -1e-8 * hi;
}

double wulff_boundary_area_exact(const NormModel& norm) {
  const int n = norm.dim();
  const double omega_n =
      std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  switch (norm.family()) {
    case NormFamily::Euclidean:
      return n * omega_n;
    case NormFamily::Ellipsoidal: {
      const double det = n == 3 ? norm.A3().determinant() : norm.A().determinant();
      return n * omega_n * std::sqrt(det);
    }
    case NormFamily::Quartic:
      throw InvalidSpec("no closed-form Wulff area for the quartic family");
  }
  throw Error("unknown norm family");
}

double wulff_boundary_area(const NormModel& norm, const SphereGrid& grid) {
  if (norm.dim() != 3) return wulff_boundary_area_exact(norm);
  return grid.integrate(wulff_radial_field(norm, grid).cube());
}

double wulff_ball_volume(const NormModel& norm, const SphereGrid& grid) {
  if (norm.dim() != 3) throw InvalidSpec("Wulff ball volume needs dimension 3");
  return wulff_boundary_area(norm, grid) / 3.0;
}

}  // namespace anisocap

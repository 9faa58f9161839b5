#include "anisocap/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "anisocap/flow.hpp"
#include "json.hpp"

namespace anisocap {
namespace {

[[noreturn]] void throw_exponent(const char* what, double p) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s, got p = %g", what, p);
  throw InvalidExponent(buf);
}

void require_capacity_exponent(double p, int n) {
  if (n < 3) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "dimension n = %d is below 3", n);
    throw InvalidExponent(buf);
  }
  if (!(std::isfinite(p) && p > 1.0 && p < double(n))) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "capacity exponent p = %g outside (1, %d)",
                  p, n);
    throw InvalidExponent(buf);
  }
}

// |dW|_F without a caller-supplied grid: closed form when the norm has one,
// otherwise a fixed internal quadrature (quartic family).
double wulff_area_scalar(const NormModel& norm) {
  if (norm.family() != NormFamily::Quartic)
    return wulff_boundary_area_exact(norm);
  static const SphereGrid grid = make_grid(64, 128);
  return wulff_boundary_area(norm, grid);
}

// Recursive half of the adaptive Simpson rule with Richardson correction.
template <class F>
double simpson_refine(const F& f, double a, double m, double b, double fa,
                      double fm, double fb, double whole, double tol,
                      int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_refine(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_refine(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_refine(f, a, m, b, fa, fm, fb, whole, tol, 40);
}

// Integrate f over [0, upper] splitting into geometric panels so that wide
// domains do not starve the adaptive rule; abs_tol is shared across panels
// and a relative floor keeps the recursion honest on large values.
template <class F>
double panel_quadrature(const F& f, double upper, double abs_tol) {
  if (!(upper > 0.0)) return 0.0;
  std::vector<double> cuts{0.0, std::min(1.0, upper)};
  while (cuts.back() < upper) cuts.push_back(std::min(4.0 * cuts.back(), upper));
  const double share = abs_tol / double(cuts.size() - 1);
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const double coarse =
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    const double tol = std::max(share, 1e-13 * std::abs(coarse));
    total += adaptive_simpson(f, a, b, tol);
  }
  return total;
}

struct SurfaceIntegrals {
  double area_F = 0.0;     // |Sigma|_F
  double wulff_area = 0.0; // |dW|_F on the surface's grid
  double willmore = 0.0;   // integral of H_F^2 dmu_F
};

SurfaceIntegrals surface_integrals(const RadialSurface& surface,
                                   const NormModel& norm) {
  const GeometryFields g = geometry(surface, norm);
  SurfaceIntegrals out;
  out.area_F = g.dmu_F.sum();
  out.wulff_area = wulff_boundary_area(norm, *surface.grid);
  out.willmore = (g.H_F.square() * g.dmu_F).sum();
  return out;
}

double mass_of(const SurfaceIntegrals& s) {
  return std::sqrt(s.area_F / (4.0 * s.wulff_area)) *
         (1.0 - s.willmore / (4.0 * s.wulff_area));
}

// Zero band of the Hawking mass: the mass scales like a length, so the band
// is pinned to sqrt of the anisotropic area.
double hawking_band(double area_F) { return 1e-6 * std::sqrt(area_F); }

void require_mean_convex(const Eigen::ArrayXd& H_F) {
  Eigen::Index node = 0;
  const double h_min = H_F.minCoeff(&node);
  if (h_min <= 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "F-mean convexity fails: H_F = %.3e at node %ld", h_min,
                  long(node));
    throw HypothesisViolation(buf);
  }
}

void require_quadratic(const Eigen::Vector3d& c) {
  if (!(c.allFinite() && c[0] > 0.0 && c[1] > 0.0 && c[2] > 0.0)) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "quadratic coefficients (%.3g, %.3g, %.3g) must be positive",
                  c[0], c[1], c[2]);
    throw InvalidSpec(buf);
  }
}

constexpr double kTailDominance = 1e6;  // t^2 term leads by this factor
constexpr double kSandwichSlack = 0.005;
constexpr double kWulffDetectTol = 1e-9;

}  // namespace

double hawking_mass(const RadialSurface& surface, const NormModel& norm) {
  return mass_of(surface_integrals(surface, norm));
}

double willmore_energy(const RadialSurface& surface, const NormModel& norm) {
  const GeometryFields g = geometry(surface, norm);
  return (g.H_F.square() * g.dmu_F).sum();
}

double curvature_integral_bound(const RadialSurface& surface,
                                const NormModel& norm, double p) {
  if (!(std::isfinite(p) && p >= 2.0 && p < 3.0))
    throw_exponent("curvature-integral bound needs 2 <= p < 3", p);
  const GeometryFields g = geometry(surface, norm);
  require_mean_convex(g.H_F);
  const double coeff = std::pow(2.0 * (p - 1.0) / (3.0 - p), 1.0 - p);
  return coeff * (g.H_F.pow(p - 1.0) * g.dmu_F).sum();
}

double curvature_interpolation_bound(const RadialSurface& surface,
                                     const NormModel& norm, double p,
                                     double q) {
  if (!(std::isfinite(p) && p > 1.0 && p <= 2.0))
    throw_exponent("interpolated curvature bound needs 1 < p <= 2", p);
  if (!(std::isfinite(q) && q >= 2.0 && q < 3.0))
    throw_exponent("interpolated curvature bound needs 2 <= q < 3", q);
  if (p == q) return curvature_integral_bound(surface, norm, p);
  const GeometryFields g = geometry(surface, norm);
  require_mean_convex(g.H_F);
  const double coeff = std::pow(2.0 * (p - 1.0) / (3.0 - p), 1.0 - p);
  const double moment = (g.H_F.pow(q - 1.0) * g.dmu_F).sum();
  const double area = g.dmu_F.sum();
  return coeff * std::pow(moment, (p - 1.0) / (q - 1.0)) *
         std::pow(area, (q - p) / (q - 1.0));
}

double hawking_profile_integral(double E, double p) {
  if (!(std::isfinite(p) && p > 1.0 && p < 3.0))
    throw_exponent("profile integral needs 1 < p < 3", p);
  if (!(E > 1.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "Willmore ratio E = %g must exceed 1", E);
    throw NonPositiveUpperLimit(buf);
  }
  const double a = (p - 1.0) / (3.0 - p);
  const double upper = std::pow(E - 1.0, 1.0 / a);
  auto f = [a](double r) { return 1.0 / std::sqrt(1.0 + std::pow(r, a)); };
  return panel_quadrature(f, upper, 1e-10);
}

double hawking_mass_bound(const RadialSurface& surface, const NormModel& norm,
                          double p) {
  if (!(std::isfinite(p) && p > 1.0 && p < 3.0))
    throw_exponent("Hawking-mass bound needs 1 < p < 3", p);
  const SurfaceIntegrals s = surface_integrals(surface, norm);
  const double m = mass_of(s);
  const double band = hawking_band(s.area_F);
  if (m > band) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "Hawking mass %.3e exceeds the embedded-surface band %.3e",
                  m, band);
    throw PositiveHawkingMass(buf);
  }
  const double coeff = std::pow((3.0 - p) / (p - 1.0), p - 1.0);
  if (m >= -band) {
    const double r0 = std::sqrt(s.area_F / s.wulff_area);
    return coeff * s.wulff_area * std::pow(r0, 3.0 - p);
  }
  const double E = s.willmore / (4.0 * s.wulff_area);
  const double theta = hawking_profile_integral(E, p);
  return coeff * std::pow(s.wulff_area, 0.5 * (p - 1.0)) *
         std::pow(s.area_F, 0.5 * (3.0 - p)) * std::pow(E - 1.0, 3.0 - p) *
         std::pow(theta, 1.0 - p);
}

double hawking_mass_bound_p2(const RadialSurface& surface,
                             const NormModel& norm) {
  const SurfaceIntegrals s = surface_integrals(surface, norm);
  const double E = s.willmore / (4.0 * s.wulff_area);
  return 0.5 * std::sqrt(s.wulff_area * s.area_F) * (1.0 + std::sqrt(E));
}

double quadratic_decay_integral(const Eigen::Vector3d& c, double p) {
  if (!(std::isfinite(p) && p > 1.0 && p < 3.0))
    throw_exponent("quadratic decay integral needs 1 < p < 3", p);
  require_quadratic(c);
  const double e = 1.0 / (1.0 - p);
  // Switch point where c2 t^2 leads the lower-order terms by kTailDominance.
  const double s = kTailDominance;
  const double t_star =
      (s * c[1] + std::sqrt(s * s * c[1] * c[1] + 4.0 * s * c[2] * c[0])) /
      (2.0 * c[2]);
  auto f = [&c, e](double t) {
    return std::pow(c[0] + t * (c[1] + t * c[2]), e);
  };
  const double head = panel_quadrature(f, t_star, 1e-14);
  // Beyond t_star the integrand is c2^e t^{2e} up to O(1/s); its tail
  // integral is the power law below (2e + 1 < 0 for p < 3).
  const double tail =
      std::pow(c[2], e) * std::pow(t_star, 2.0 * e + 1.0) / (-(2.0 * e + 1.0));
  return head + tail;
}

double quadratic_decay_integral_p2(const Eigen::Vector3d& c) {
  require_quadratic(c);
  const double disc = 1.0 - 4.0 * c[2] * c[0] / (c[1] * c[1]);
  const double eps = std::sqrt(std::max(0.0, disc));
  if (eps < 1e-4)  // log((1+x)/(1-x))/x = 2 (1 + x^2/3 + O(x^4))
    return 2.0 / c[1] * (1.0 + eps * eps / 3.0);
  return std::log((1.0 + eps) / (1.0 - eps)) / (c[1] * eps);
}

double normal_flow_bound(const RadialSurface& surface, const NormModel& norm,
                         double p) {
  if (!(std::isfinite(p) && p > 1.0 && p < 3.0))
    throw_exponent("normal-flow bound needs 1 < p < 3", p);
  const Eigen::Vector3d c = normal_flow_Tp_coeffs(surface, norm);
  const double integral = (p == 2.0) ? quadratic_decay_integral_p2(c)
                                     : quadratic_decay_integral(c, p);
  return std::pow(integral, 1.0 - p);
}

double homothety_bound(const RadialSurface& surface, const NormModel& norm,
                       double p) {
  if (!(std::isfinite(p) && p > 1.0 && p < 3.0))
    throw_exponent("homothety bound needs 1 < p < 3", p);
  const double coeff = std::pow((3.0 - p) / (p - 1.0), p - 1.0);
  return coeff * homothety_Tp_coeff(surface, norm, p);
}

double perimeter_volume_lower(double area_F, double volume,
                              const NormModel& norm, double p, int n) {
  require_capacity_exponent(p, n);
  if (!(std::isfinite(area_F) && area_F > 0.0 && std::isfinite(volume) &&
        volume > 0.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "area %.3g and volume %.3g must be positive", area_F,
                  volume);
    throw InvalidSpec(buf);
  }
  const double wa = wulff_area_scalar(norm);
  const double a = p * (n - 1.0) / (n * (n - p)) *
                   std::pow(area_F, n / (n - 1.0)) *
                   std::pow(wa, 1.0 / (1.0 - n));
  const double b = std::pow(area_F, p / (p - 1.0));
  if (!(a > volume)) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "perimeter term %.6g does not exceed the volume %.6g "
                  "(isoperimetric-inconsistent inputs)",
                  a, volume);
    throw DegenerateDenominator(buf);
  }
  return std::pow(b / (a - volume), p - 1.0);
}

double isocapacitary_lower(double volume, const NormModel& norm, double p,
                           int n) {
  require_capacity_exponent(p, n);
  if (!(std::isfinite(volume) && volume > 0.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "volume %.3g must be positive", volume);
    throw InvalidSpec(buf);
  }
  const double wulff_volume = wulff_area_scalar(norm) / norm.dim();
  return n * std::pow(wulff_volume, p / double(n)) *
         std::pow((n - p) / (p - 1.0), p - 1.0) *
         std::pow(volume, (n - p) / double(n));
}

double isoperimetric_defect(const RadialSurface& surface,
                            const NormModel& norm) {
  const double area_F = anisotropic_area(surface, norm);
  const double volume = enclosed_volume(surface);
  const double wulff_volume = wulff_ball_volume(norm, *surface.grid);
  return area_F - 3.0 * std::cbrt(wulff_volume) * std::pow(volume, 2.0 / 3.0);
}

double wulff_capacity_exact(const NormModel& norm, double p, double r0,
                            int n) {
  require_capacity_exponent(p, n);
  if (!(std::isfinite(r0) && r0 > 0.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "Wulff radius %.3g must be positive", r0);
    throw InvalidSpec(buf);
  }
  return std::pow((n - p) / (p - 1.0), p - 1.0) * wulff_area_scalar(norm) *
         std::pow(r0, double(n - p));
}

BoundsReport bounds_report(const RadialSurface& surface, const NormModel& norm,
                           double p, double q) {
  if (!(std::isfinite(p) && p > 1.0 && p < 3.0))
    throw_exponent("report exponent needs 1 < p < 3", p);
  if (!(std::isfinite(q) && q >= 2.0 && q < 3.0))
    throw_exponent("companion exponent needs 2 <= q < 3", q);

  const GeometryFields g = geometry(surface, norm);
  const SphereGrid& grid = *surface.grid;

  BoundsReport rep;
  rep.p = p;
  rep.q = q;
  rep.volume = enclosed_volume(surface);
  rep.area_F = g.dmu_F.sum();
  rep.wulff_area = wulff_boundary_area(norm, grid);
  rep.wulff_volume = wulff_ball_volume(norm, grid);
  rep.willmore = (g.H_F.square() * g.dmu_F).sum();
  rep.hawking = std::sqrt(rep.area_F / (4.0 * rep.wulff_area)) *
                (1.0 - rep.willmore / (4.0 * rep.wulff_area));
  rep.isoperimetric = rep.area_F - 3.0 * std::cbrt(rep.wulff_volume) *
                                       std::pow(rep.volume, 2.0 / 3.0);
  rep.mean_convex = g.H_F.minCoeff() > 0.0;
  rep.convex = is_convex(g);

  auto guarded = [](auto&& eval) -> std::optional<double> {
    try {
      return eval();
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  if (rep.mean_convex) {
    if (p >= 2.0)
      rep.curvature =
          guarded([&] { return curvature_integral_bound(surface, norm, p); });
    if (p <= 2.0)
      rep.curvature_pq = guarded(
          [&] { return curvature_interpolation_bound(surface, norm, p, q); });
    rep.hawking_bound =
        guarded([&] { return hawking_mass_bound(surface, norm, p); });
    rep.hawking_p2 =
        guarded([&] { return hawking_mass_bound_p2(surface, norm); });
  }
  if (rep.convex)
    rep.normal_flow =
        guarded([&] { return normal_flow_bound(surface, norm, p); });
  rep.homothety = guarded([&] { return homothety_bound(surface, norm, p); });
  rep.perimeter_volume = guarded(
      [&] { return perimeter_volume_lower(rep.area_F, rep.volume, norm, p); });
  rep.isocapacitary = isocapacitary_lower(rep.volume, norm, p);

  // Scaled-Wulff detection: radius field a constant multiple of the gauge.
  const Eigen::ArrayXd& gauge = wulff_radial_field(norm, grid);
  const Eigen::ArrayXd ratio = surface.r / gauge;
  const double r0 = ratio.mean();
  if ((ratio / r0 - 1.0).abs().maxCoeff() <= kWulffDetectTol)
    rep.oracle = wulff_capacity_exact(norm, p, r0);

  rep.hawking_nonpositive = rep.hawking <= hawking_band(rep.area_F);
  rep.willmore_at_least_wulff =
      rep.willmore >= 4.0 * rep.wulff_area * (1.0 - kSandwichSlack);
  rep.isoperimetric_nonneg = rep.isoperimetric >= -1e-6 * rep.area_F;

  double lower = rep.isocapacitary;
  if (rep.convex && rep.perimeter_volume)
    lower = std::max(lower, *rep.perimeter_volume);
  double upper = std::numeric_limits<double>::infinity();
  for (const auto& bound :
       {rep.curvature, rep.curvature_pq, rep.hawking_bound, rep.normal_flow,
        rep.homothety})
    if (bound) upper = std::min(upper, *bound);
  // hawking_p2 bounds the p = 2 capacity specifically, so it joins the
  // sandwich only when the report's exponent is 2.
  if (p == 2.0 && rep.hawking_p2) upper = std::min(upper, *rep.hawking_p2);
  rep.sandwich = lower <= upper * (1.0 + kSandwichSlack);
  return rep;
}

std::string report_json(const BoundsReport& rep) {
  using json = nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  json j;
  j["body"] = {{"volume", rep.volume},
               {"area_F", rep.area_F},
               {"wulff_area", rep.wulff_area},
               {"wulff_volume", rep.wulff_volume}};
  j["exponents"] = {{"p", rep.p}, {"q", rep.q}};
  j["hawking"] = rep.hawking;
  j["willmore"] = rep.willmore;
  j["isoperimetric_defect"] = rep.isoperimetric;
  j["hypotheses"] = {{"mean_convex", rep.mean_convex}, {"convex", rep.convex}};
  j["upper_bounds"] = {{"curvature", opt(rep.curvature)},
                       {"curvature_pq", opt(rep.curvature_pq)},
                       {"hawking", opt(rep.hawking_bound)},
                       {"hawking_p2", opt(rep.hawking_p2)},
                       {"normal_flow", opt(rep.normal_flow)},
                       {"homothety", opt(rep.homothety)}};
  j["lower_bounds"] = {{"perimeter_volume", opt(rep.perimeter_volume)},
                       {"isocapacitary", rep.isocapacitary}};
  j["oracle"] = opt(rep.oracle);
  j["flags"] = {{"hawking_nonpositive", rep.hawking_nonpositive},
                {"willmore_at_least_wulff", rep.willmore_at_least_wulff},
                {"isoperimetric_nonneg", rep.isoperimetric_nonneg},
                {"sandwich", rep.sandwich}};
  return j.dump(2) + "\n";
}

std::string report_table(const BoundsReport& rep) {
  std::string out;
  char line[160];
  auto row = [&](const char* name, double value) {
    std::snprintf(line, sizeof line, "%-28s %.12g\n", name, value);
    out += line;
  };
  auto opt_row = [&](const char* name, const std::optional<double>& value) {
    if (value) {
      row(name, *value);
    } else {
      std::snprintf(line, sizeof line, "%-28s absent\n", name);
      out += line;
    }
  };
  auto flag_row = [&](const char* name, bool pass) {
    std::snprintf(line, sizeof line, "%-28s %s\n", name, pass ? "pass" : "FAIL");
    out += line;
  };
  std::snprintf(line, sizeof line, "capacity bounds, p = %g, q = %g\n", rep.p,
                rep.q);
  out += line;
  row("volume", rep.volume);
  row("area_F", rep.area_F);
  row("wulff_area", rep.wulff_area);
  row("wulff_volume", rep.wulff_volume);
  row("hawking_mass", rep.hawking);
  row("willmore_energy", rep.willmore);
  row("isoperimetric_defect", rep.isoperimetric);
  std::snprintf(line, sizeof line, "%-28s %s\n", "mean_convex",
                rep.mean_convex ? "yes" : "no");
  out += line;
  std::snprintf(line, sizeof line, "%-28s %s\n", "convex",
                rep.convex ? "yes" : "no");
  out += line;
  opt_row("upper curvature", rep.curvature);
  opt_row("upper curvature_pq", rep.curvature_pq);
  opt_row("upper hawking", rep.hawking_bound);
  opt_row("upper hawking_p2", rep.hawking_p2);
  opt_row("upper normal_flow", rep.normal_flow);
  opt_row("upper homothety", rep.homothety);
  opt_row("lower perimeter_volume", rep.perimeter_volume);
  row("lower isocapacitary", rep.isocapacitary);
  opt_row("oracle", rep.oracle);
  flag_row("flag hawking_nonpositive", rep.hawking_nonpositive);
  flag_row("flag willmore", rep.willmore_at_least_wulff);
  flag_row("flag isoperimetric", rep.isoperimetric_nonneg);
  flag_row("flag sandwich", rep.sandwich);
  return out;
}

}  // namespace anisocap

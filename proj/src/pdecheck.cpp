#include "anisocap/pdecheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "anisocap/parallel.hpp"

namespace anisocap {

namespace {

// Four-point first-derivative stencil (offsets +2, +1, -1, -2): O(h^4).
constexpr int kOffsets[4] = {2, 1, -1, -2};
constexpr double kWeights[4] = {-1.0, 8.0, -8.0, 1.0};

void require_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw InvalidSpec("finite-difference step must be positive");
}

void require_point(const ScalarField& field, const Eigen::VectorXd& x) {
  if (x.size() != field.dim)
    throw InvalidSpec("evaluation point size does not match the field");
}

}  // namespace

ScalarField wulff_potential(const NormModel& norm, double r0, double p,
                            int n) {
  if (n != norm.dim())
    throw InvalidSpec("potential dimension must match the norm");
  if (!(p > 1.0) || !(p < static_cast<double>(n))) {
    char msg[96];
    std::snprintf(msg, sizeof msg,
                  "potential needs 1 < p < n, got p = %g, n = %d", p, n);
    throw InvalidExponent(msg);
  }
  if (!(r0 > 0.0)) throw InvalidSpec("potential radius must be positive");
  const double decay = (static_cast<double>(n) - p) / (p - 1.0);
  ScalarField field;
  field.dim = n;
  field.eval = [nm = norm, r0, decay](const Eigen::VectorXd& x) {
    return std::pow(eval_F0(nm, x) / r0, -decay);
  };
  return field;
}

Eigen::VectorXd fd_gradient(const ScalarField& field, const Eigen::VectorXd& x,
                            double h) {
  require_step(h);
  require_point(field, x);
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int s = 0; s < 4; ++s) {
      probe[i] = x[i] + kOffsets[s] * h;
      acc += kWeights[s] * field.eval(probe);
    }
    probe[i] = x[i];
    g[i] = acc / (12.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const ScalarField& field, const Eigen::VectorXd& x,
                           double h) {
  require_step(h);
  require_point(field, x);
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd probe = x;
  const double center = field.eval(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    // five-point second derivative: (-f2 + 16 f1 - 30 f0 + 16 f-1 - f-2)/12h^2
    double acc = -30.0 * center;
    const double w2[4] = {-1.0, 16.0, 16.0, -1.0};
    for (int s = 0; s < 4; ++s) {
      probe[i] = x[i] + kOffsets[s] * h;
      acc += w2[s] * field.eval(probe);
    }
    probe[i] = x[i];
    H(i, i) = acc / (12.0 * h * h);
    // mixed derivatives: the first-derivative stencil applied on both axes
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double cross = 0.0;
      for (int a = 0; a < 4; ++a) {
        probe[i] = x[i] + kOffsets[a] * h;
        for (int b = 0; b < 4; ++b) {
          probe[j] = x[j] + kOffsets[b] * h;
          cross += kWeights[a] * kWeights[b] * field.eval(probe);
        }
        probe[j] = x[j];
      }
      probe[i] = x[i];
      H(i, j) = H(j, i) = cross / (144.0 * h * h);
    }
  }
  return H;
}

double anisotropic_p_laplacian(const NormModel& norm, const ScalarField& field,
                               const Eigen::VectorXd& x, double p, double h) {
  require_step(h);
  require_point(field, x);
  if (x.size() != norm.dim())
    throw InvalidSpec("evaluation point size does not match the norm");

  const double u0 = field.eval(x);
  const Eigen::VectorXd g = fd_gradient(field, x, h);
  const double gn = g.norm();
  const double xn = x.norm();
  const double scale = std::abs(u0) / (xn > 0.0 ? xn : h);
  if (gn == 0.0 || gn < 1e-8 * scale) {
    char msg[96];
    std::snprintf(msg, sizeof msg,
                  "gradient %.3e below the regularity scale %.3e", gn,
                  1e-8 * scale);
    throw CriticalPoint(msg);
  }

  const Eigen::MatrixXd H = fd_hessian(field, x, h);
  const double f = eval_F(norm, g);
  const Eigen::VectorXd df = grad_F(norm, g);
  const Eigen::MatrixXd d2f = hess_F(norm, g);
  const Eigen::MatrixXd coeff = f * d2f + (p - 1.0) * (df * df.transpose());
  return std::pow(f, p - 2.0) * coeff.cwiseProduct(H).sum();
}

std::vector<ResidualSample> residual_survey(
    const NormModel& norm, const ScalarField& field,
    const std::vector<Eigen::VectorXd>& points, double p,
    const std::vector<double>& h_rels) {
  for (double h : h_rels) require_step(h);
  std::vector<ResidualSample> out(points.size() * h_rels.size());
  parallel_for(out.size(), [&](std::size_t k) {
    const std::size_t pi = k / h_rels.size();
    const std::size_t hi = k % h_rels.size();
    ResidualSample& s = out[k];
    s.x = points[pi];
    s.h_rel = h_rels[hi];
    s.residual = anisotropic_p_laplacian(norm, field, s.x, p,
                                         s.h_rel * s.x.norm());
  });
  return out;
}

double max_residual(const std::vector<ResidualSample>& samples, double h_rel) {
  double worst = 0.0;
  for (const auto& s : samples)
    if (s.h_rel == h_rel) worst = std::max(worst, std::abs(s.residual));
  return worst;
}

std::string residual_csv(const std::vector<ResidualSample>& samples) {
  const Eigen::Index dim = samples.empty() ? 3 : samples.front().x.size();
  std::string out;
  if (dim == 3) {
    out = "x,y,z,h,residual\n";
  } else {
    for (Eigen::Index i = 0; i < dim; ++i) {
      char col[24];
      std::snprintf(col, sizeof col, "x%ld,", static_cast<long>(i));
      out += col;
    }
    out += "h,residual\n";
  }
  char cell[64];
  for (const auto& s : samples) {
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      std::snprintf(cell, sizeof cell, "%.17g,", s.x[i]);
      out += cell;
    }
    std::snprintf(cell, sizeof cell, "%.17g,%.17g\n", s.h_rel, s.residual);
    out += cell;
  }
  return out;
}

std::vector<Eigen::VectorXd> shell_points(const NormModel& norm, int count,
                                          double s_lo, double s_hi) {
  if (count <= 0) throw InvalidSpec("shell sample count must be positive");
  if (!(s_lo > 0.0) || !(s_hi >= s_lo))
    throw InvalidSpec("shell radii must satisfy 0 < s_lo <= s_hi");
  const int n = norm.dim();
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  const double ratio = s_hi / s_lo;
  if (n == 3) {
    const auto dirs = fibonacci_directions(count);
    for (int k = 0; k < count; ++k) {
      const double frac = count > 1 ? double(k) / double(count - 1) : 0.5;
      const double s = s_lo * std::pow(ratio, frac);
      const Eigen::Vector3d& d = dirs[static_cast<std::size_t>(k)];
      out.push_back(Eigen::VectorXd((s / eval_F0(norm, d)) * d));
    }
    return out;
  }
  // Deterministic quasi-uniform directions for n > 3: an additive-recurrence
  // lattice pushed through sin, then normalized.  Diversity is all the
  // residual survey needs from these points.
  static const double kAlpha[] = {1.4142135623730951, 1.7320508075688772,
                                  2.2360679774997896, 2.6457513110645907,
                                  3.3166247903553998, 3.6055512754639891};
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i)
      d[i] = std::sin((k + 1) * kAlpha[i % 6] + 0.7 * i);
    d.normalize();
    const double frac = count > 1 ? double(k) / double(count - 1) : 0.5;
    const double s = s_lo * std::pow(ratio, frac);
    out.push_back(Eigen::VectorXd((s / eval_F0(norm, d)) * d));
  }
  return out;
}

double flux_capacity(const NormModel& norm, const ScalarField& field, double p,
                     double level, const SphereGrid& grid) {
  if (!(level > 0.0) || !(level < 1.0))
    throw InvalidSpec("flux level must lie in (0, 1)");
  if (field.dim != 3 || norm.dim() != 3)
    throw InvalidSpec("flux capacity is computed on a 3-d sphere grid");

  const std::size_t nodes = static_cast<std::size_t>(grid.size());
  Eigen::ArrayXd r(nodes);
  Eigen::ArrayXd integrand(nodes);
  parallel_for(nodes, [&](std::size_t k) {
    const Eigen::Vector3d d = grid.p().col(static_cast<Eigen::Index>(k));
    auto along = [&](double rho) { return field(Eigen::Vector3d(rho * d)); };
    // bracket the level: the field exceeds `level` inside and drops below it
    // outside (capacitary decay), so shrink inward / expand outward from 1
    double lo = 1.0, hi = 1.0;
    int guard = 0;
    while (along(lo) < level) {
      lo *= 0.5;
      if (++guard > 600) throw LevelSetNotFound("no inner bracket radius");
    }
    guard = 0;
    while (along(hi) > level) {
      hi *= 2.0;
      if (++guard > 600) throw LevelSetNotFound("no outer bracket radius");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (along(mid) >= level ? lo : hi) = mid;
    }
    r[k] = 0.5 * (lo + hi);

    const Eigen::VectorXd x = r[k] * d;
    const Eigen::VectorXd du = fd_gradient(field, x, 1e-3 * r[k]);
    const double dn = du.norm();
    if (dn == 0.0) throw CriticalPoint("vanishing gradient on the level set");
    integrand[k] = std::pow(eval_F(norm, du), p) / dn;
  });

  RadialSurface sigma = surface_from_field(grid, r);
  const GeometryFields geo = geometry(sigma, norm);
  return integrate(sigma, geo, integrand, Measure::Dmu);
}

}  // namespace anisocap

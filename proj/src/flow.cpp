#include "anisocap/flow.hpp"

#include <cmath>
#include <cstdio>

#include "anisocap/errors.hpp"

namespace anisocap {
namespace {

[[noreturn]] void throw_convexity(double h, int node, double t) {
  char msg[112];
  std::snprintf(msg, sizeof msg,
                "F-mean convexity lost: H_F = %.3e at node %d, t = %.6f", h,
                node, t);
  throw MeanConvexityLost(msg);
}

// Safety factor over the symbol bound (1.372/h)^2 of the composed second
// colatitude derivative; the Gauss-Legendre rows are close to uniform.
constexpr double kThetaSymbol = 2.4;

// Orthonormal real Fourier basis on the uniform longitude circle together
// with the exact symbol of the discrete d2_phi stencil.  Row-wise circulant
// operators diagonalize here, which turns (I - dt*L) solves into two dense
// matrix products over all rows at once.
struct AzimuthalBasis {
  Eigen::MatrixXd Q;      // n_phi x n_phi, columns = modes
  Eigen::RowVectorXd sym; // per column: -eigenvalue of d2_phi (>= 0)

  explicit AzimuthalBasis(const SphereGrid& grid) {
    const int n = grid.n_phi();
    const double dphi = grid.delta_phi();
    Q.resize(n, n);
    sym.resize(n);
    const double c0 = 1.0 / std::sqrt(double(n));
    const double c1 = std::sqrt(2.0 / n);
    auto symbol = [dphi](int m) {
      return (30.0 - 32.0 * std::cos(m * dphi) + 2.0 * std::cos(2.0 * m * dphi)) /
             (12.0 * dphi * dphi);
    };
    for (int j = 0; j < n; ++j) Q(j, 0) = c0;
    sym[0] = 0.0;
    for (int m = 1; m < n / 2; ++m) {
      for (int j = 0; j < n; ++j) {
        Q(j, 2 * m - 1) = c1 * std::cos(m * grid.phi(j));
        Q(j, 2 * m) = c1 * std::sin(m * grid.phi(j));
      }
      sym[2 * m - 1] = sym[2 * m] = symbol(m);
    }
    for (int j = 0; j < n; ++j) Q(j, n - 1) = (j % 2 == 0 ? c0 : -c0);
    sym[n - 1] = symbol(n / 2);
  }
};

using RowMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// One flow step's shared scratch: geometry, rhs and the azimuthal operator
// coefficients, refreshed at every stage evaluation.
struct Stepper {
  const SphereGrid& grid;
  const NormModel& norm;
  const FlowControls& ctl;
  AzimuthalBasis basis;
  double theta_symbol;

  MeanCurvatureFields mc;
  Eigen::ArrayXd r, rhs, dcoef;
  Eigen::ArrayXd row_coef;  // c_i = max_row(D) / sin^2(theta_i)
  Eigen::ArrayXd lrho, k1, k2, work;
  Eigen::MatrixXd modal, denom;

  Stepper(const SphereGrid& g, const NormModel& nm, const FlowControls& c)
      : grid(g), norm(nm), ctl(c), basis(g) {
    const double h = g.min_theta_spacing();
    theta_symbol = kThetaSymbol / (h * h);
    row_coef.resize(g.n_theta());
  }

  // Geometry + rhs + diffusive scale of the state rho (r = exp(rho)).
  void eval(const Eigen::ArrayXd& rho, double t) {
    r = rho.exp();
    if (!r.isFinite().all())
      throw NonPositiveRadius("flow state became non-finite");
    mean_curvature_fields(grid, r, norm, mc);
    int node = 0;
    const double hmin = mc.H_F.minCoeff(&node);
    if (!(hmin > ctl.min_HF)) throw_convexity(hmin, node, t);
    rhs = mc.F_nu * mc.J / (r.cube() * mc.H_F);
    dcoef = mc.F_nu * mc.a_max / (r * mc.H_F).square();
  }

  // Freeze the azimuthal operator for this step from the stage-1 scale.
  void freeze_rows() {
    const int nphi = grid.n_phi();
    for (int i = 0; i < grid.n_theta(); ++i) {
      const double dmax = dcoef.segment(i * nphi, nphi).maxCoeff();
      const double s = grid.sin_theta(i);
      row_coef[i] = dmax / (s * s);
    }
  }

  // L rho: row-scaled discrete azimuthal diffusion.
  void apply_L(const Eigen::ArrayXd& rho, Eigen::ArrayXd& out) {
    grid.d2_phi_into(rho, out);
    const int nphi = grid.n_phi();
    for (int i = 0; i < grid.n_theta(); ++i)
      out.segment(i * nphi, nphi) *= row_coef[i];
  }

  // (I - dt L)^{-1} b via the modal basis, overwriting b.
  void solve(Eigen::ArrayXd& b, double dt) {
    const int nth = grid.n_theta();
    const int nphi = grid.n_phi();
    RowMap rows(b.data(), nth, nphi);
    modal.noalias() = rows * basis.Q;
    denom.noalias() = dt * row_coef.matrix() * basis.sym;
    modal.array() /= (1.0 + denom.array());
    rows.noalias() = modal * basis.Q.transpose();
  }

  double stable_dt() const {
    return ctl.cfl * 2.0 / (dcoef.maxCoeff() * theta_symbol);
  }
};

void check_controls(const FlowControls& c) {
  if (!(c.t_end > 0.0) || !std::isfinite(c.t_end))
    throw InvalidSpec("flow t_end must be positive");
  if (!(c.cfl > 0.0 && c.cfl <= 0.5))
    throw InvalidSpec("flow cfl must lie in (0, 0.5]");
  if (!(c.snapshot_every > 0.0) || !std::isfinite(c.snapshot_every))
    throw InvalidSpec("flow snapshot_every must be positive");
  if (c.max_steps < 1) throw InvalidSpec("flow max_steps must be positive");
  if (!(c.min_HF > 0.0)) throw InvalidSpec("flow min_HF must be positive");
}

}  // namespace

Eigen::ArrayXd iamcf_rhs(const RadialSurface& surface, const NormModel& norm,
                         double min_HF) {
  check_surface(surface);
  MeanCurvatureFields mc;
  mean_curvature_fields(*surface.grid, surface.r, norm, mc);
  int node = 0;
  const double hmin = mc.H_F.minCoeff(&node);
  if (!(hmin > min_HF)) throw_convexity(hmin, node, 0.0);
  return mc.F_nu * mc.J / (surface.r.cube() * mc.H_F);
}

FlowTrace run_iamcf(const RadialSurface& surface, const NormModel& norm,
                    const FlowControls& controls,
                    const std::vector<double>& p_list) {
  check_controls(controls);
  check_surface(surface);
  const SphereGrid& grid = *surface.grid;
  const Eigen::ArrayXd& wulff = wulff_radial_field(norm, grid);
  const double wulff_area = wulff_boundary_area(norm, grid);

  std::vector<double> targets{0.0};
  for (long k = 1;; ++k) {
    const double tk = k * controls.snapshot_every;
    if (tk >= controls.t_end * (1.0 - 1e-12)) break;
    targets.push_back(tk);
  }
  targets.push_back(controls.t_end);

  FlowTrace trace;
  trace.p_list = p_list;
  trace.times.reserve(targets.size());
  trace.samples.reserve(targets.size());
  trace.surfaces.reserve(targets.size());

  Stepper st(grid, norm, controls);
  Eigen::ArrayXd rho = surface.r.log();

  auto record = [&](double t) {
    FlowSample s;
    s.t = t;
    const Eigen::ArrayXd dmuF = st.mc.F_nu * st.mc.J * grid.weights();
    s.area_F = dmuF.sum();
    s.T_p.reserve(p_list.size());
    for (double p : p_list)
      s.T_p.push_back((st.mc.H_F.pow(p - 1.0) * dmuF).sum());
    const double willmore = (st.mc.H_F.square() * dmuF).sum();
    const double w4 = 4.0 * wulff_area;
    s.hawking = std::sqrt(s.area_F / w4) * (1.0 - willmore / w4);
    const Eigen::ArrayXd q = st.r / wulff;
    const double qbar = (q * grid.weights()).sum() / (4.0 * M_PI);
    s.shape_dev = (q / qbar - 1.0).abs().maxCoeff();
    s.min_HF = st.mc.H_F.minCoeff();
    trace.times.push_back(t);
    trace.samples.push_back(std::move(s));
    trace.surfaces.push_back(RadialSurface{&grid, st.r});
  };

  double t = 0.0;
  std::size_t ti = 0;
  const double tol = 1e-12 * std::max(1.0, controls.t_end);
  for (;;) {
    st.eval(rho, t);
    if (ti < targets.size() && t >= targets[ti] - tol) {
      record(targets[ti]);
      if (++ti == targets.size()) break;
    }
    double dt = st.stable_dt();
    bool land = false;
    if (t + dt >= targets[ti] - tol) {
      dt = targets[ti] - t;
      land = true;
    }
    st.freeze_rows();
    st.apply_L(rho, st.lrho);
    st.k1 = st.rhs - st.lrho;
    st.work = rho + dt * st.k1;
    st.solve(st.work, dt);

    st.eval(st.work, t + dt);
    st.apply_L(st.work, st.lrho);
    st.k2 = st.rhs - st.lrho;
    rho += 0.5 * dt * (st.k1 + st.k2);
    st.solve(rho, dt);

    t = land ? targets[ti] : t + dt;
    if (++trace.steps > controls.max_steps) {
      char msg[96];
      std::snprintf(msg, sizeof msg,
                    "step limit %ld exhausted at t = %.6f of %.6f",
                    controls.max_steps, t, controls.t_end);
      throw StepLimitExceeded(msg);
    }
  }
  return trace;
}

double capacity_upper_from_trace(const FlowTrace& trace, double p, int n) {
  if (!(p > 1.0 && p < double(n))) {
    char msg[80];
    std::snprintf(msg, sizeof msg, "p = %g outside (1, %d)", p, n);
    throw InvalidExponent(msg);
  }
  std::size_t ip = trace.p_list.size();
  for (std::size_t i = 0; i < trace.p_list.size(); ++i)
    if (std::abs(trace.p_list[i] - p) <= 1e-12) ip = i;
  if (ip == trace.p_list.size())
    throw InvalidExponent("p was not recorded in the trace");
  if (trace.times.size() < 2)
    throw Error("trace has fewer than two samples");

  const double expo = -1.0 / (p - 1.0);
  auto g = [&](std::size_t k) {
    const double tp = trace.samples[k].T_p[ip];
    if (!(tp > 0.0)) throw Error("non-positive T_p in trace");
    return std::pow(tp, expo);
  };
  double integral = 0.0;
  for (std::size_t k = 1; k < trace.times.size(); ++k)
    integral += 0.5 * (trace.times[k] - trace.times[k - 1]) * (g(k) + g(k - 1));
  const double beta = (double(n) - p) / (double(n) - 1.0);
  integral += g(trace.times.size() - 1) * (p - 1.0) / beta;
  return std::pow(integral, 1.0 - p);
}

Eigen::Vector3d normal_flow_Tp_coeffs(const RadialSurface& surface,
                                      const NormModel& norm) {
  const GeometryFields gf = geometry(surface, norm);
  if (!is_convex(gf))
    throw NotConvex("normal-flow coefficients need a convex surface");
  Eigen::Vector3d c;
  for (int k = 0; k < 3; ++k)
    c[k] = integrate(surface, gf, gf.sigma(k), Measure::DmuF);
  return c;
}

double homothety_Tp_coeff(const RadialSurface& surface, const NormModel& norm,
                          double p) {
  if (!std::isfinite(p)) throw InvalidExponent("p must be finite");
  const GeometryFields gf = geometry(surface, norm);
  int node = 0;
  const double hmin = gf.h_F.minCoeff(&node);
  if (!(hmin > 0.0)) {
    char msg[96];
    std::snprintf(msg, sizeof msg,
                  "anisotropic support h_F = %.3e at node %d", hmin, node);
    throw NonPositiveSupport(msg);
  }
  return integrate(surface, gf, gf.h_F.pow(1.0 - p), Measure::DmuF);
}

}  // namespace anisocap

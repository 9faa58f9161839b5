#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "anisocap/sphere_grid.hpp"

using namespace anisocap;
using Eigen::ArrayXd;

namespace {

constexpr double kPi = std::numbers::pi;

struct Field {
  ArrayXd f, ft, fp, ftt, fpp, ftp;
};

// f = exp(sin(theta) cos(phi) + cos(theta)/2): smooth on the whole sphere,
// so it exercises the pole-crossing stencils with a known derivative.
Field smooth_field(const SphereGrid& g) {
  Field out;
  const int n = g.size();
  out.f.resize(n);
  out.ft.resize(n);
  out.fp.resize(n);
  out.ftt.resize(n);
  out.fpp.resize(n);
  out.ftp.resize(n);
  for (int i = 0; i < g.n_theta(); ++i) {
    const double st = std::sin(g.theta(i)), ct = std::cos(g.theta(i));
    for (int j = 0; j < g.n_phi(); ++j) {
      const double cp = std::cos(g.phi(j)), sp = std::sin(g.phi(j));
      const int k = g.index(i, j);
      const double a = st * cp + 0.5 * ct;
      const double at = ct * cp - 0.5 * st;
      const double ap = -st * sp;
      const double att = -st * cp - 0.5 * ct;
      const double app = -st * cp;
      const double atp = -ct * sp;
      const double e = std::exp(a);
      out.f[k] = e;
      out.ft[k] = e * at;
      out.fp[k] = e * ap;
      out.ftt[k] = e * (at * at + att);
      out.fpp[k] = e * (ap * ap + app);
      out.ftp[k] = e * (at * ap + atp);
    }
  }
  return out;
}

double max_err(const ArrayXd& a, const ArrayXd& b) {
  return (a - b).abs().maxCoeff();
}

}  // namespace

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(make_grid(15, 32), InvalidGrid);
  CHECK_THROWS_AS(make_grid(16, 31), InvalidGrid);
  CHECK_THROWS_AS(make_grid(16, 30), InvalidGrid);
}

TEST_CASE("quadrature weights and exactness") {
  for (auto [nt, np] : {std::pair{16, 32}, std::pair{96, 192}}) {
    const SphereGrid g = make_grid(nt, np);
    CHECK(g.integrate(ArrayXd::Ones(g.size())) ==
          doctest::Approx(4.0 * kPi).epsilon(1e-12));

    ArrayXd y20(g.size()), cos2(g.size()), y33(g.size());
    for (int i = 0; i < g.n_theta(); ++i)
      for (int j = 0; j < g.n_phi(); ++j) {
        const int k = g.index(i, j);
        const double ct = std::cos(g.theta(i)), st = std::sin(g.theta(i));
        y20[k] = 3.0 * ct * ct - 1.0;
        cos2[k] = ct * ct;
        y33[k] = st * st * st * std::cos(3.0 * g.phi(j));
      }
    CHECK(std::abs(g.integrate(y20)) < 1e-12);
    CHECK(std::abs(g.integrate(y33)) < 1e-12);
    CHECK(g.integrate(cos2) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-13));
  }
}

TEST_CASE("derivatives of smooth fields converge at high order") {
  const SphereGrid g1 = make_grid(16, 32);
  const SphereGrid g2 = make_grid(32, 64);
  const Field f1 = smooth_field(g1);
  const Field f2 = smooth_field(g2);

  const double et1 = max_err(g1.d_theta(f1.f), f1.ft);
  const double et2 = max_err(g2.d_theta(f2.f), f2.ft);
  const double ep1 = max_err(g1.d_phi(f1.f), f1.fp);
  const double ep2 = max_err(g2.d_phi(f2.f), f2.fp);
  const double ett1 = max_err(g1.d2_theta(f1.f), f1.ftt);
  const double ett2 = max_err(g2.d2_theta(f2.f), f2.ftt);
  const double epp1 = max_err(g1.d2_phi(f1.f), f1.fpp);
  const double epp2 = max_err(g2.d2_phi(f2.f), f2.fpp);
  const double etp1 = max_err(g1.d_theta_phi(f1.f), f1.ftp);
  const double etp2 = max_err(g2.d_theta_phi(f2.f), f2.ftp);

  CAPTURE(et1);
  CAPTURE(et2);
  CAPTURE(ett1);
  CAPTURE(ett2);
  CAPTURE(etp1);
  CAPTURE(etp2);
  // first derivatives: 5-point stencils are 4th order
  CHECK(std::log2(et1 / et2) > 3.5);
  CHECK(std::log2(ep1 / ep2) > 3.5);
  // composed second/mixed derivatives are 4th order as well
  CHECK(std::log2(ett1 / ett2) > 3.5);
  CHECK(std::log2(epp1 / epp2) > 2.5);
  CHECK(std::log2(etp1 / etp2) > 2.5);
}

TEST_CASE("pole crossing is exact for simple global fields") {
  const SphereGrid g = make_grid(32, 64);
  ArrayXd c = ArrayXd::Constant(g.size(), 2.75);
  CHECK(g.d_theta(c).abs().maxCoeff() < 1e-12);
  CHECK(g.d2_theta(c).abs().maxCoeff() < 1e-12);
  CHECK(g.d_phi(c).abs().maxCoeff() < 1e-12);

  ArrayXd pz(g.size()), px(g.size()), want_t(g.size()), want_x(g.size());
  for (int i = 0; i < g.n_theta(); ++i)
    for (int j = 0; j < g.n_phi(); ++j) {
      const int k = g.index(i, j);
      pz[k] = std::cos(g.theta(i));
      px[k] = std::sin(g.theta(i)) * std::cos(g.phi(j));
      want_t[k] = -std::sin(g.theta(i));
      want_x[k] = std::cos(g.theta(i)) * std::cos(g.phi(j));
    }
  CHECK(max_err(g.d_theta(pz), want_t) < 1e-5);
  CHECK(max_err(g.d_theta(px), want_x) < 1e-5);
}

TEST_CASE("fornberg weights recover classic stencils") {
  const std::vector<double> xs = {-2, -1, 0, 1, 2};
  const Eigen::MatrixXd c = fd_weights(0.0, xs, 2);
  const double d1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  const double d2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  for (int m = 0; m < 5; ++m) {
    CHECK(c(m, 1) == doctest::Approx(d1[m]).epsilon(1e-13));
    CHECK(c(m, 2) == doctest::Approx(d2[m]).epsilon(1e-13));
  }
}

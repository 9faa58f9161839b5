#include "anisocap/sphere_grid.hpp"

#include <cmath>
#include <numbers>

namespace anisocap {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes (ascending) and weights on [-1, 1] by Newton iteration
// on P_n from Chebyshev initial guesses.
void gauss_legendre(int n, Eigen::ArrayXd& x, Eigen::ArrayXd& w) {
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    double t = std::cos(kPi * (n - k - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2 * m - 1) * t * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    // one clean-up evaluation of P'_n at the converged node
    double p0 = 1.0, p1 = t;
    for (int m = 2; m <= n; ++m) {
      const double p2 = ((2 * m - 1) * t * p1 - (m - 1) * p0) / m;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[k] = t;
    w[k] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

Eigen::MatrixXd fd_weights(double x0, const std::vector<double>& xs,
                           int order) {
  const int n = static_cast<int>(xs.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, order + 1);
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k)
        c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c;
}

SphereGrid make_grid(int n_theta, int n_phi) {
  if (n_theta < 16) throw InvalidGrid("n_theta must be at least 16");
  if (n_phi < 32 || n_phi % 2 != 0)
    throw InvalidGrid("n_phi must be even and at least 32");

  SphereGrid g;
  g.ntheta_ = n_theta;
  g.nphi_ = n_phi;
  g.dphi_ = 2.0 * kPi / n_phi;

  Eigen::ArrayXd x, wgl;
  gauss_legendre(n_theta, x, wgl);
  // x ascending => theta = acos(x) descending; store theta ascending.
  g.theta_.resize(n_theta);
  Eigen::ArrayXd wrow(n_theta);
  for (int i = 0; i < n_theta; ++i) {
    g.theta_[i] = std::acos(x[n_theta - 1 - i]);
    wrow[i] = wgl[n_theta - 1 - i];
  }
  g.sin_theta_ = g.theta_.sin();
  g.cos_theta_ = g.theta_.cos();

  g.min_dtheta_ = g.theta_[0] * 2.0;  // distance to the mirrored node -theta0
  for (int i = 0; i + 1 < n_theta; ++i)
    g.min_dtheta_ = std::min(g.min_dtheta_, g.theta_[i + 1] - g.theta_[i]);

  const int n = n_theta * n_phi;
  g.w_.resize(n);
  g.p_.resize(3, n);
  g.pth_.resize(3, n);
  g.pph_.resize(3, n);
  g.pthth_.resize(3, n);
  g.pthph_.resize(3, n);
  g.pphph_.resize(3, n);
  for (int i = 0; i < n_theta; ++i) {
    const double st = g.sin_theta_[i], ct = g.cos_theta_[i];
    for (int j = 0; j < n_phi; ++j) {
      const int k = g.index(i, j);
      const double cp = std::cos(g.dphi_ * j), sp = std::sin(g.dphi_ * j);
      g.w_[k] = wrow[i] * g.dphi_;
      g.p_.col(k) << st * cp, st * sp, ct;
      g.pth_.col(k) << ct * cp, ct * sp, -st;
      g.pph_.col(k) << -st * sp, st * cp, 0.0;
      g.pthth_.col(k) = -g.p_.col(k);
      g.pthph_.col(k) << -ct * sp, ct * cp, 0.0;
      g.pphph_.col(k) << -st * cp, -st * sp, 0.0;
    }
  }

  // Colatitude stencils.  Extended nodes across the poles sit at -theta_m
  // (north) and 2*pi - theta_m (south) and read the field half a turn away.
  g.tst_.resize(n_theta);
  const int half = n_phi / 2;
  for (int i = 0; i < n_theta; ++i) {
    SphereGrid::ThetaStencil& s = g.tst_[i];
    std::vector<double> pos(5);
    for (int m = 0; m < 5; ++m) {
      const int ke = i + m - 2;
      if (ke < 0) {
        const int src = -ke - 1;
        s.row[m] = src;
        s.shift[m] = half;
        pos[m] = -g.theta_[src];
      } else if (ke >= n_theta) {
        const int src = 2 * n_theta - 1 - ke;
        s.row[m] = src;
        s.shift[m] = half;
        pos[m] = 2.0 * kPi - g.theta_[src];
      } else {
        s.row[m] = ke;
        s.shift[m] = 0;
        pos[m] = g.theta_[ke];
      }
    }
    const Eigen::MatrixXd c = fd_weights(g.theta_[i], pos, 1);
    for (int m = 0; m < 5; ++m) s.w1[m] = c(m, 1);
  }
  return g;
}

void SphereGrid::check_field(const Eigen::ArrayXd& f) const {
  if (f.size() != size())
    throw InvalidGrid("field size does not match grid");
}

double SphereGrid::integrate(const Eigen::ArrayXd& f) const {
  check_field(f);
  double acc = 0.0;
  for (int k = 0; k < size(); ++k) acc += f[k] * w_[k];
  return acc;
}

template <bool Flip>
void SphereGrid::theta_apply(const Eigen::ArrayXd& f,
                             Eigen::ArrayXd& out) const {
  const int nphi = nphi_;
  for (int i = 0; i < ntheta_; ++i) {
    const ThetaStencil& s = tst_[i];
    const int base = i * nphi;
    for (int j = 0; j < nphi; ++j) {
      double acc = 0.0;
      for (int m = 0; m < 5; ++m) {
        int jj = j + s.shift[m];
        if (jj >= nphi) jj -= nphi;
        double v = f[s.row[m] * nphi + jj];
        if (Flip && s.shift[m] != 0) v = -v;
        acc += s.w1[m] * v;
      }
      out[base + j] = acc;
    }
  }
}

void SphereGrid::d_theta_into(const Eigen::ArrayXd& f,
                              Eigen::ArrayXd& out) const {
  check_field(f);
  out.resize(size());
  theta_apply<false>(f, out);
}

void SphereGrid::d2_theta_into(const Eigen::ArrayXd& f,
                               Eigen::ArrayXd& out) const {
  check_field(f);
  Eigen::ArrayXd tmp(size());
  theta_apply<false>(f, tmp);
  out.resize(size());
  theta_apply<true>(tmp, out);
}

void SphereGrid::d_phi_into(const Eigen::ArrayXd& f,
                            Eigen::ArrayXd& out) const {
  check_field(f);
  out.resize(size());
  const double c = 1.0 / (12.0 * dphi_);
  for (int i = 0; i < ntheta_; ++i) {
    const int base = i * nphi_;
    for (int j = 0; j < nphi_; ++j) {
      const int jp1 = base + (j + 1) % nphi_;
      const int jp2 = base + (j + 2) % nphi_;
      const int jm1 = base + (j + nphi_ - 1) % nphi_;
      const int jm2 = base + (j + nphi_ - 2) % nphi_;
      out[base + j] = c * (-f[jp2] + 8.0 * f[jp1] - 8.0 * f[jm1] + f[jm2]);
    }
  }
}

void SphereGrid::d2_phi_into(const Eigen::ArrayXd& f,
                             Eigen::ArrayXd& out) const {
  check_field(f);
  out.resize(size());
  const double c = 1.0 / (12.0 * dphi_ * dphi_);
  for (int i = 0; i < ntheta_; ++i) {
    const int base = i * nphi_;
    for (int j = 0; j < nphi_; ++j) {
      const int jp1 = base + (j + 1) % nphi_;
      const int jp2 = base + (j + 2) % nphi_;
      const int jm1 = base + (j + nphi_ - 1) % nphi_;
      const int jm2 = base + (j + nphi_ - 2) % nphi_;
      out[base + j] = c * (-f[jp2] + 16.0 * f[jp1] - 30.0 * f[base + j] +
                           16.0 * f[jm1] - f[jm2]);
    }
  }
}

Eigen::ArrayXd SphereGrid::d_theta(const Eigen::ArrayXd& f) const {
  Eigen::ArrayXd out;
  d_theta_into(f, out);
  return out;
}

Eigen::ArrayXd SphereGrid::d2_theta(const Eigen::ArrayXd& f) const {
  Eigen::ArrayXd out;
  d2_theta_into(f, out);
  return out;
}

Eigen::ArrayXd SphereGrid::d_phi(const Eigen::ArrayXd& f) const {
  Eigen::ArrayXd out;
  d_phi_into(f, out);
  return out;
}

Eigen::ArrayXd SphereGrid::d2_phi(const Eigen::ArrayXd& f) const {
  Eigen::ArrayXd out;
  d2_phi_into(f, out);
  return out;
}

Eigen::ArrayXd SphereGrid::d_theta_phi(const Eigen::ArrayXd& f) const {
  return d_theta(d_phi(f));
}

}  // namespace anisocap

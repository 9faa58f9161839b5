#pragma once

#include <Eigen/Dense>
#include <vector>

#include "anisocap/errors.hpp"

namespace anisocap {

// Quadrature + differentiation grid on S^2: Gauss-Legendre nodes in
// cos(theta) tensored with uniform longitudes.  There are no pole nodes;
// colatitude stencils that would step past a pole re-enter on the opposite
// meridian (phi -> phi + pi), which is why n_phi must be even.
//
// Scalar fields live in Eigen::ArrayXd with node index k = i * n_phi + j,
// i the colatitude row (theta increasing), j the longitude column.
class SphereGrid {
 public:
  int n_theta() const { return ntheta_; }
  int n_phi() const { return nphi_; }
  int size() const { return ntheta_ * nphi_; }
  int index(int i, int j) const { return i * nphi_ + j; }
  int row_of(int k) const { return k / nphi_; }

  double theta(int i) const { return theta_[i]; }
  double phi(int j) const { return dphi_ * j; }
  double delta_phi() const { return dphi_; }
  double sin_theta(int i) const { return sin_theta_[i]; }
  double min_theta_spacing() const { return min_dtheta_; }

  // Per-node quadrature weights; their fixed-order sum is 4*pi.
  const Eigen::ArrayXd& weights() const { return w_; }

  // Unit node directions and their analytic (theta, phi) derivatives,
  // one column per node.
  const Eigen::Matrix3Xd& p() const { return p_; }
  const Eigen::Matrix3Xd& p_theta() const { return pth_; }
  const Eigen::Matrix3Xd& p_phi() const { return pph_; }
  const Eigen::Matrix3Xd& p_theta_theta() const { return pthth_; }
  const Eigen::Matrix3Xd& p_theta_phi() const { return pthph_; }
  const Eigen::Matrix3Xd& p_phi_phi() const { return pphph_; }

  // Fixed-order quadrature: sum_k f[k] * w[k].
  double integrate(const Eigen::ArrayXd& f) const;

  // 5-point finite differences: 4th order in phi (uniform, periodic) and in
  // theta (Fornberg weights on the Gauss-Legendre colatitudes, pole-crossing).
  // The second theta derivative composes two first-derivative passes, which
  // keeps 4th order on the non-uniform rows; the intermediate field flips
  // sign across the poles and the outer pass accounts for that.
  void d_theta_into(const Eigen::ArrayXd& f, Eigen::ArrayXd& out) const;
  void d2_theta_into(const Eigen::ArrayXd& f, Eigen::ArrayXd& out) const;
  void d_phi_into(const Eigen::ArrayXd& f, Eigen::ArrayXd& out) const;
  void d2_phi_into(const Eigen::ArrayXd& f, Eigen::ArrayXd& out) const;

  Eigen::ArrayXd d_theta(const Eigen::ArrayXd& f) const;
  Eigen::ArrayXd d2_theta(const Eigen::ArrayXd& f) const;
  Eigen::ArrayXd d_phi(const Eigen::ArrayXd& f) const;
  Eigen::ArrayXd d2_phi(const Eigen::ArrayXd& f) const;
  // Mixed derivative as d_theta(d_phi(f)); d_phi(f) is again a smooth scalar
  // field on the sphere, so the pole-crossing rule stays valid.
  Eigen::ArrayXd d_theta_phi(const Eigen::ArrayXd& f) const;

 private:
  friend SphereGrid make_grid(int n_theta, int n_phi);
  SphereGrid() = default;

  struct ThetaStencil {
    int row[5];
    int shift[5];  // 0 or n_phi/2, applied modulo n_phi
    double w1[5];
  };

  void check_field(const Eigen::ArrayXd& f) const;
  template <bool Flip>
  void theta_apply(const Eigen::ArrayXd& f, Eigen::ArrayXd& out) const;

  int ntheta_ = 0;
  int nphi_ = 0;
  double dphi_ = 0.0;
  double min_dtheta_ = 0.0;
  Eigen::ArrayXd theta_, sin_theta_, cos_theta_;
  Eigen::ArrayXd w_;
  Eigen::Matrix3Xd p_, pth_, pph_, pthth_, pthph_, pphph_;
  std::vector<ThetaStencil> tst_;
};

// n_theta >= 16, n_phi >= 32 and even.
SphereGrid make_grid(int n_theta, int n_phi);

// Finite-difference weights on arbitrary nodes (Fornberg's recurrence):
// returns an xs.size() x (order+1) matrix whose column m holds the weights
// of the m-th derivative at x0.
Eigen::MatrixXd fd_weights(double x0, const std::vector<double>& xs, int order);

}  // namespace anisocap

#include "anisocap/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <utility>

namespace anisocap {
namespace {

template <class V>
using SquareOf = Eigen::Matrix<typename V::Scalar, V::RowsAtCompileTime,
                               V::RowsAtCompileTime>;

template <class V>
void check_direction(const V& xi) {
  if (!(xi.squaredNorm() > 0.0))
    throw ZeroDirection("norm queried at a zero (or non-finite) direction");
}

// Quartic family at a unit direction u.  F(xi) = |xi| (1 + a sum_i u_i^4)
// with u = xi/|xi|; grad is 0-homogeneous, hess scales as 1/|xi|.
template <class V>
double quartic_value_unit(double a, const V& u) {
  return 1.0 + a * u.array().square().square().sum();
}

template <class V>
typename V::PlainObject quartic_grad_unit(double a, const V& u) {
  const double s = u.array().square().square().sum();
  const typename V::PlainObject u3 = u.array().cube().matrix();
  return u + a * (4.0 * u3 - 3.0 * s * u);
}

template <class V>
SquareOf<V> quartic_hess_unit(double a, const V& u) {
  const auto n = u.size();
  const double s = u.array().square().square().sum();
  const typename V::PlainObject u3 = u.array().cube().matrix();
  SquareOf<V> h = (1.0 - 3.0 * a * s) * SquareOf<V>::Identity(n, n);
  h += (12.0 * a) * u.array().square().matrix().asDiagonal();
  h += (15.0 * a * s - 1.0) * (u * u.transpose());
  h -= (12.0 * a) * (u3 * u.transpose() + u * u3.transpose());
  return h;
}

// Family dispatch.  All evaluators normalize first and use homogeneity, which
// keeps tiny and huge inputs well conditioned.
template <class MA, class V>
double evalF_T(const NormModel& norm, const MA& A, const V& xi) {
  check_direction(xi);
  const double len = xi.norm();
  switch (norm.family()) {
    case NormFamily::Euclidean:
      return len;
    case NormFamily::Ellipsoidal: {
      const typename V::PlainObject u = xi / len;
      return len * std::sqrt(u.dot(A * u));
    }
    case NormFamily::Quartic: {
      const typename V::PlainObject u = xi / len;
      return len * quartic_value_unit(norm.spec().amplitude, u);
    }
  }
  throw Error("unknown norm family");
}

template <class MA, class V>
typename V::PlainObject gradF_T(const NormModel& norm, const MA& A,
                                const V& xi) {
  check_direction(xi);
  const typename V::PlainObject u = xi.normalized();
  switch (norm.family()) {
    case NormFamily::Euclidean:
      return u;
    case NormFamily::Ellipsoidal: {
      const typename V::PlainObject au = A * u;
      return au / std::sqrt(u.dot(au));
    }
    case NormFamily::Quartic:
      return quartic_grad_unit(norm.spec().amplitude, u);
  }
  throw Error("unknown norm family");
}

template <class MA, class V>
SquareOf<V> hessF_T(const NormModel& norm, const MA& A, const V& xi) {
  check_direction(xi);
  const double len = xi.norm();
  const typename V::PlainObject u = xi / len;
  const auto n = u.size();
  switch (norm.family()) {
    case NormFamily::Euclidean:
      return (SquareOf<V>::Identity(n, n) - u * u.transpose()) / len;
    case NormFamily::Ellipsoidal: {
      const double f = std::sqrt(u.dot(A * u));
      const typename V::PlainObject df = (A * u) / f;
      return (A - df * df.transpose()) / (f * len);
    }
    case NormFamily::Quartic:
      return quartic_hess_unit(norm.spec().amplitude, u) / len;
  }
  throw Error("unknown norm family");
}

Eigen::Matrix<double, 3, 2> tangent_basis(const Eigen::Vector3d& u) {
  int k = 0;
  u.cwiseAbs().minCoeff(&k);
  const Eigen::Vector3d e = Eigen::Vector3d::Unit(k);
  const Eigen::Vector3d t1 = (e - e.dot(u) * u).normalized();
  Eigen::Matrix<double, 3, 2> b;
  b.col(0) = t1;
  b.col(1) = u.cross(t1);
  return b;
}

Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size();
  Eigen::MatrixXd m(n, 1);
  m.col(0) = u;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - 1);
}

// For n > 3 there is no golden-spiral analogue; a fixed-seed Gaussian sample
// is deterministic and close enough to uniform for seeding purposes.
std::vector<Eigen::VectorXd> sample_directions(int n, int count) {
  if (n == 3) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    for (const auto& d : fibonacci_directions(count))
      out.push_back(Eigen::VectorXd(d));
    return out;
  }
  std::mt19937_64 rng(0x2545F4914F6CDD1Dull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    const double len = v.norm();
    if (len > 1e-6) out.push_back(v / len);
  }
  return out;
}

// Maximize q(xi) = <y, xi>/F(xi) over the unit sphere by projected Newton
// with backtracking.  q is 0-homogeneous, so <xi, Dq> = 0 and the spherical
// Hessian is exactly the ambient one restricted to the tangent plane.
template <class MA, class Vec>
std::pair<double, Vec> refine_dual(const NormModel& norm, const MA& A,
                                   const Vec& y, Vec xi) {
  const DualSolverSettings& ds = norm.spec().dual;
  double q = y.dot(xi) / evalF_T(norm, A, xi);
  for (int it = 0; it < ds.newton_iters; ++it) {
    const double f = evalF_T(norm, A, xi);
    const Vec df = gradF_T(norm, A, xi);
    const auto d2f = hessF_T(norm, A, xi);
    const double c = y.dot(xi);
    const Vec dq = y / f - (c / (f * f)) * df;
    const auto b = tangent_basis(xi);
    const auto d2q = (-(y * df.transpose() + df * y.transpose()) / (f * f) -
                      (c / (f * f)) * d2f +
                      (2.0 * c / (f * f * f)) * (df * df.transpose()))
                         .eval();
    const auto g = (b.transpose() * dq).eval();
    auto h = (b.transpose() * d2q * b).eval();
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<std::decay_t<decltype(h)>> eig(h);
    std::decay_t<decltype(g)> du;
    if (eig.eigenvalues().maxCoeff() < -1e-14) {
      // Newton step du = -h^{-1} g through the eigendecomposition.
      du = -eig.eigenvectors() *
           ((eig.eigenvectors().transpose() * g).array() /
            eig.eigenvalues().array())
               .matrix();
    } else {
      const double scale =
          std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
      du = g / scale;
    }
    double step = 1.0;
    Vec cand = xi;
    double qc = q;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      cand = (xi + b * (step * du)).normalized();
      qc = y.dot(cand) / evalF_T(norm, A, cand);
      if (qc >= q) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
    const double moved = step * du.norm();
    xi = cand;
    q = qc;
    if (moved < ds.tol) break;
  }
  return {q, xi};
}

template <class MA, class V>
std::pair<double, typename V::PlainObject> dual_solve(const NormModel& norm,
                                                      const MA& A,
                                                      const V& x) {
  check_direction(x);
  using Vec = typename V::PlainObject;
  const double len = x.norm();
  const Vec y = x / len;
  const Eigen::MatrixXd& seeds = norm.dual_seeds();
  const Eigen::VectorXd overlaps = seeds.transpose() * y;
  Eigen::Index k = 0;
  (overlaps.array().abs() / norm.dual_seed_F()).maxCoeff(&k);
  const Vec best_dir =
      overlaps[k] < 0.0 ? Vec(-seeds.col(k)) : Vec(seeds.col(k));
  auto [q, xi] = refine_dual(norm, A, y, best_dir);
  return {len * q, xi};
}

}  // namespace

std::vector<Eigen::Vector3d> fibonacci_directions(int count) {
  if (count <= 0) throw InvalidSpec("direction count must be positive");
  constexpr double golden_angle = 2.399963229728653;  // pi (3 - sqrt 5)
  std::vector<Eigen::Vector3d> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * k;
    out.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  return out;
}

NormModel make_norm(const NormSpec& spec) {
  NormModel model;
  model.spec_ = spec;
  const int n = spec.dimension;
  if (n < 3) throw InvalidSpec("norm dimension must be at least 3");
  if (spec.dual.samples < 16)
    throw InvalidSpec("dual solver needs at least 16 seed directions");
  if (spec.dual.newton_iters < 0 || !(spec.dual.tol > 0.0))
    throw InvalidSpec("bad dual solver settings");

  switch (spec.family) {
    case NormFamily::Euclidean:
      break;
    case NormFamily::Ellipsoidal: {
      if (spec.matrix.rows() != n || spec.matrix.cols() != n)
        throw InvalidSpec("ellipsoidal matrix must be n x n");
      const Eigen::MatrixXd sym = 0.5 * (spec.matrix + spec.matrix.transpose());
      const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
      if ((sym - spec.matrix).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw InvalidSpec("ellipsoidal matrix must be symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
      if (!(eig.eigenvalues().minCoeff() > 0.0))
        throw InvalidSpec("ellipsoidal matrix must be positive definite");
      model.spec_.matrix = sym;
      model.Ainv_ = sym.inverse();
      if (n == 3) {
        model.A3_ = sym;
        model.Ainv3_ = model.Ainv_;
      }
      break;
    }
    case NormFamily::Quartic: {
      const double a = spec.amplitude;
      if (!std::isfinite(a)) throw InvalidSpec("quartic amplitude must be finite");
      if (1.0 + a <= 0.0 || 1.0 + a / 3.0 <= 0.0)
        throw InvalidSpec("quartic amplitude makes F non-positive");
      // Seed sample for the dual solver, shared across every dual_solve call.
      const auto dirs = sample_directions(n, spec.dual.samples);
      model.dual_seeds_.resize(n, static_cast<Eigen::Index>(dirs.size()));
      model.dual_seed_F_.resize(static_cast<Eigen::Index>(dirs.size()));
      for (Eigen::Index i = 0; i < model.dual_seeds_.cols(); ++i) {
        model.dual_seeds_.col(i) = dirs[static_cast<std::size_t>(i)];
        model.dual_seed_F_[i] =
            evalF_T(model, model.A3_, dirs[static_cast<std::size_t>(i)]);
      }
      break;
    }
  }

  // Ellipticity survey: smallest eigenvalue of Hess(F^2/2) over a
  // quasi-uniform direction sample.  Hess(F^2/2) = F hess_F + grad_F grad_F^T
  // is 0-homogeneous, so unit directions suffice.
  const int count = std::max(2048, spec.dual.samples);
  double margin = std::numeric_limits<double>::infinity();
  if (n == 3) {
    for (const auto& d : fibonacci_directions(count)) {
      const double f = evalF_T(model, model.A3_, d);
      const Eigen::Vector3d df = gradF_T(model, model.A3_, d);
      const Eigen::Matrix3d h2 =
          f * hessF_T(model, model.A3_, d) + df * df.transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(h2);
      margin = std::min(margin, eig.eigenvalues().minCoeff());
    }
  } else {
    for (const auto& d : sample_directions(n, count)) {
      const double f = evalF_T(model, model.spec_.matrix, d);
      const Eigen::VectorXd df = gradF_T(model, model.spec_.matrix, d);
      const Eigen::MatrixXd h2 =
          f * hessF_T(model, model.spec_.matrix, d) + df * df.transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h2);
      margin = std::min(margin, eig.eigenvalues().minCoeff());
    }
  }
  model.margin_ = margin;
  if (!(margin > 0.0)) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "Hess(F^2/2) is not positive definite (margin %.3e)",
                  margin);
    throw EllipticityViolation(msg);
  }
  return model;
}

double eval_F(const NormModel& norm, const Eigen::Vector3d& xi) {
  if (norm.dim() != 3) throw InvalidSpec("3-vector overload needs dimension 3");
  return evalF_T(norm, norm.A3(), xi);
}

Eigen::Vector3d grad_F(const NormModel& norm, const Eigen::Vector3d& xi) {
  if (norm.dim() != 3) throw InvalidSpec("3-vector overload needs dimension 3");
  return gradF_T(norm, norm.A3(), xi);
}

Eigen::Matrix3d hess_F(const NormModel& norm, const Eigen::Vector3d& xi) {
  if (norm.dim() != 3) throw InvalidSpec("3-vector overload needs dimension 3");
  return hessF_T(norm, norm.A3(), xi);
}

double eval_F(const NormModel& norm, const Eigen::VectorXd& xi) {
  if (xi.size() != norm.dim()) throw InvalidSpec("direction size mismatch");
  return evalF_T(norm, norm.A(), xi);
}

Eigen::VectorXd grad_F(const NormModel& norm, const Eigen::VectorXd& xi) {
  if (xi.size() != norm.dim()) throw InvalidSpec("direction size mismatch");
  return gradF_T(norm, norm.A(), xi);
}

Eigen::MatrixXd hess_F(const NormModel& norm, const Eigen::VectorXd& xi) {
  if (xi.size() != norm.dim()) throw InvalidSpec("direction size mismatch");
  return hessF_T(norm, norm.A(), xi);
}

double eval_F0(const NormModel& norm, const Eigen::Vector3d& x) {
  if (norm.dim() != 3) throw InvalidSpec("3-vector overload needs dimension 3");
  check_direction(x);
  switch (norm.family()) {
    case NormFamily::Euclidean:
      return x.norm();
    case NormFamily::Ellipsoidal: {
      const double len = x.norm();
      const Eigen::Vector3d u = x / len;
      return len * std::sqrt(u.dot(norm.Ainv3() * u));
    }
    case NormFamily::Quartic:
      return dual_solve(norm, norm.A3(), x).first;
  }
  throw Error("unknown norm family");
}

Eigen::Vector3d grad_F0(const NormModel& norm, const Eigen::Vector3d& x) {
  if (norm.dim() != 3) throw InvalidSpec("3-vector overload needs dimension 3");
  check_direction(x);
  switch (norm.family()) {
    case NormFamily::Euclidean:
      return x.normalized();
    case NormFamily::Ellipsoidal: {
      const Eigen::Vector3d u = x.normalized();
      const Eigen::Vector3d aiu = norm.Ainv3() * u;
      return aiu / std::sqrt(u.dot(aiu));
    }
    case NormFamily::Quartic: {
      const auto [value, xi] = dual_solve(norm, norm.A3(), x);
      return xi / evalF_T(norm, norm.A3(), xi);
    }
  }
  throw Error("unknown norm family");
}

double eval_F0(const NormModel& norm, const Eigen::VectorXd& x) {
  if (x.size() != norm.dim()) throw InvalidSpec("direction size mismatch");
  check_direction(x);
  switch (norm.family()) {
    case NormFamily::Euclidean:
      return x.norm();
    case NormFamily::Ellipsoidal: {
      const double len = x.norm();
      const Eigen::VectorXd u = x / len;
      return len * std::sqrt(u.dot(norm.Ainv() * u));
    }
    case NormFamily::Quartic:
      return dual_solve(norm, norm.A(), x).first;
  }
  throw Error("unknown norm family");
}

Eigen::VectorXd grad_F0(const NormModel& norm, const Eigen::VectorXd& x) {
  if (x.size() != norm.dim()) throw InvalidSpec("direction size mismatch");
  check_direction(x);
  switch (norm.family()) {
    case NormFamily::Euclidean:
      return x.normalized();
    case NormFamily::Ellipsoidal: {
      const Eigen::VectorXd u = x.normalized();
      const Eigen::VectorXd aiu = norm.Ainv() * u;
      return aiu / std::sqrt(u.dot(aiu));
    }
    case NormFamily::Quartic: {
      const auto [value, xi] = dual_solve(norm, norm.A(), x);
      return xi / evalF_T(norm, norm.A(), xi);
    }
  }
  throw Error("unknown norm family");
}

double wulff_radial(const NormModel& norm, const Eigen::Vector3d& p) {
  return 1.0 / eval_F0(norm, p);
}

bool operator==(const NormSpec& a, const NormSpec& b) {
  if (a.family != b.family || a.dimension != b.dimension ||
      a.amplitude != b.amplitude || !(a.dual == b.dual))
    return false;
  if (a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols())
    return false;
  return a.matrix.size() == 0 || (a.matrix.array() == b.matrix.array()).all();
}

void eval_norm_jet(const NormModel& norm, const Eigen::Vector3d& u, double& f,
                   Eigen::Vector3d& df, Eigen::Matrix3d& d2f) {
  switch (norm.family()) {
    case NormFamily::Euclidean:
      f = 1.0;
      df = u;
      d2f = Eigen::Matrix3d::Identity() - u * u.transpose();
      return;
    case NormFamily::Ellipsoidal: {
      const Eigen::Vector3d au = norm.A3() * u;
      f = std::sqrt(u.dot(au));
      df = au / f;
      d2f = (norm.A3() - df * df.transpose()) / f;
      return;
    }
    case NormFamily::Quartic: {
      const double a = norm.spec().amplitude;
      f = quartic_value_unit(a, u);
      df = quartic_grad_unit(a, u);
      d2f = quartic_hess_unit(a, u);
      return;
    }
  }
  throw Error("unknown norm family");
}

WeingartenFactor anisotropic_weingarten_factor(const NormModel& norm,
                                               const Eigen::Vector3d& nu) {
  if (norm.dim() != 3) throw InvalidSpec("3-vector overload needs dimension 3");
  check_direction(nu);
  const Eigen::Vector3d u = nu.normalized();
  WeingartenFactor w;
  w.basis = tangent_basis(u);
  const Eigen::Matrix3d h = hess_F(norm, u);
  Eigen::Matrix2d a = w.basis.transpose() * h * w.basis;
  w.a = 0.5 * (a + a.transpose());
  return w;
}

}  // namespace anisocap

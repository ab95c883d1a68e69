#include "epr/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "epr/errors.hpp"
#include "epr/units.hpp"

namespace epr {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPhysicalTol = 1e-9;
constexpr double kMarginalTol = 1e-3;

int idx(Quad q) { return static_cast<int>(q); }

Eigen::Matrix4d symplectic_form() {
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = 1.0;
  omega(1, 0) = -1.0;
  omega(2, 3) = 1.0;
  omega(3, 2) = -1.0;
  return omega;
}

}  // namespace

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

QuadratureAngles::QuadratureAngles(double t1, double t2)
    : theta1(wrap_angle(t1)), theta2(wrap_angle(t2)) {}

bool TwoModeVariances::all_positive() const {
  return x_minus > 0.0 && x_plus > 0.0 && y_minus > 0.0 && y_plus > 0.0;
}

bool TwoModeVariances::heisenberg_ok() const {
  return x_minus * x_plus >= 1.0 && y_minus * y_plus >= 1.0;
}

CovarianceMatrix CovarianceMatrix::from_matrix(const Eigen::Matrix4d& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw ValidationError("covariance matrix is not symmetric");
  }
  return CovarianceMatrix(Eigen::Matrix4d(0.5 * (m + m.transpose())));
}

double CovarianceMatrix::var(Quad q) const { return m_(idx(q), idx(q)); }

double CovarianceMatrix::cov(Quad a, Quad b) const { return m_(idx(a), idx(b)); }

bool CovarianceMatrix::positive_definite() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() > 0.0;
}

std::array<double, 2> CovarianceMatrix::symplectic_eigenvalues() const {
  // Eigenvalues of i*Omega*V come in pairs ±ν_k; |eig(Omega*V)| recovers them.
  const Eigen::Matrix4d ov = symplectic_form() * m_;
  Eigen::EigenSolver<Eigen::Matrix4d> solver(ov, /*computeEigenvectors=*/false);
  std::array<double, 4> mags{};
  for (int i = 0; i < 4; ++i) mags[i] = std::abs(solver.eigenvalues()[i]);
  std::sort(mags.begin(), mags.end());
  return {mags[0], mags[2]};
}

Physicality CovarianceMatrix::physicality() const {
  const double nu_min = symplectic_eigenvalues()[0];
  if (nu_min >= 1.0 - kPhysicalTol) return Physicality::physical;
  if (nu_min >= 1.0 - kMarginalTol) return Physicality::marginal;
  return Physicality::unphysical;
}

CovarianceMatrix symmetric_state(const TwoModeVariances& v) {
  if (!v.all_positive()) {
    throw ValidationError("symmetric_state: all four combination variances must be positive");
  }
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  const double ax = 0.5 * (v.x_plus + v.x_minus);
  const double cx = 0.5 * (v.x_plus - v.x_minus);
  const double ay = 0.5 * (v.y_plus + v.y_minus);
  const double cy = 0.5 * (v.y_plus - v.y_minus);
  m(0, 0) = ax;
  m(2, 2) = ax;
  m(0, 2) = m(2, 0) = cx;
  m(1, 1) = ay;
  m(3, 3) = ay;
  m(1, 3) = m(3, 1) = cy;
  return CovarianceMatrix::from_matrix(m);
}

TwoModeVariances combination_variances(const CovarianceMatrix& cm) {
  const auto& m = cm.matrix();
  TwoModeVariances v;
  v.x_minus = 0.5 * (m(0, 0) + m(2, 2)) - m(0, 2);
  v.x_plus = 0.5 * (m(0, 0) + m(2, 2)) + m(0, 2);
  v.y_minus = 0.5 * (m(1, 1) + m(3, 3)) - m(1, 3);
  v.y_plus = 0.5 * (m(1, 1) + m(3, 3)) + m(1, 3);
  return v;
}

double purity(const CovarianceMatrix& cm) {
  const double det = cm.determinant();
  if (det <= 0.0) {
    throw ValidationError("purity: covariance matrix has non-positive determinant");
  }
  return 1.0 / std::sqrt(det);
}

ConditionalVariance conditional_variance(const CovarianceMatrix& cm, Quad o1, Quad o2) {
  const double v2 = cm.var(o2);
  if (v2 <= 0.0) {
    throw ValidationError("conditional_variance: Var(o2) must be positive");
  }
  const double c = cm.cov(o1, o2);
  const double w = c / v2;
  return {cm.var(o1) - c * c / v2, w};
}

ReidProduct reid_product(const CovarianceMatrix& cm) {
  const auto cx = conditional_variance(cm, Quad::x1, Quad::x2);
  const auto cy = conditional_variance(cm, Quad::y1, Quad::y2);
  ReidProduct r;
  r.cond_var_x = cx.variance;
  r.cond_var_y = cy.variance;
  r.gain_x = cx.gain;
  r.gain_y = cy.gain;
  r.e_squared = cx.variance * cy.variance;
  r.e = std::sqrt(r.e_squared);
  return r;
}

double duan_sum(const CovarianceMatrix& cm) {
  const auto& m = cm.matrix();
  return 0.5 * (m(0, 0) + m(2, 2) - 2.0 * m(0, 2)) +
         0.5 * (m(1, 1) + m(3, 3) + 2.0 * m(1, 3));
}

CovarianceMatrix rotate_quadratures(const CovarianceMatrix& cm, const QuadratureAngles& angles) {
  Eigen::Matrix4d rot = Eigen::Matrix4d::Zero();
  const double c1 = std::cos(angles.theta1), s1 = std::sin(angles.theta1);
  const double c2 = std::cos(angles.theta2), s2 = std::sin(angles.theta2);
  rot(0, 0) = c1;
  rot(0, 1) = s1;
  rot(1, 0) = -s1;
  rot(1, 1) = c1;
  rot(2, 2) = c2;
  rot(2, 3) = s2;
  rot(3, 2) = -s2;
  rot(3, 3) = c2;
  return CovarianceMatrix::from_matrix(rot * cm.matrix() * rot.transpose());
}

CovarianceMatrix apply_uniform_efficiency(const CovarianceMatrix& cm, double eta) {
  return apply_per_mode_efficiency(cm, eta, eta);
}

CovarianceMatrix apply_per_mode_efficiency(const CovarianceMatrix& cm, double eta1, double eta2) {
  if (!(eta1 >= 0.0 && eta1 <= 1.0) || !(eta2 >= 0.0 && eta2 <= 1.0)) {
    throw ValidationError("efficiency must lie in [0, 1]");
  }
  Eigen::Vector4d d;
  const double r1 = std::sqrt(eta1), r2 = std::sqrt(eta2);
  d << r1, r1, r2, r2;
  const Eigen::Matrix4d scaled = d.asDiagonal() * cm.matrix() * d.asDiagonal();
  Eigen::Vector4d vac;
  vac << 1.0 - eta1, 1.0 - eta1, 1.0 - eta2, 1.0 - eta2;
  return CovarianceMatrix::from_matrix(scaled + Eigen::Matrix4d(vac.asDiagonal()));
}

double invert_efficiency(double v_measured, double eta) {
  if (eta <= 0.0) {
    throw ValidationError("invert_efficiency: eta must be positive");
  }
  if (eta > 1.0) {
    throw ValidationError("invert_efficiency: eta must not exceed 1");
  }
  const double v = (v_measured - 1.0) / eta + 1.0;
  if (v <= 0.0) {
    throw ValidationError("invert_efficiency: correction yields a non-positive variance");
  }
  return v;
}

}  // namespace epr

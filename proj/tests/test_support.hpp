#pragma once

// Shared helpers for the test suites: random physical states and the
// brute-force oracles the closed forms are checked against. Test-only code,
// independent of the library's solution paths.

#include <cmath>
#include <random>

#include "epr/gaussian.hpp"

namespace epr::testing {

// Random physical covariance matrix. V = A A^T + I is physical because
// V - I is positive semidefinite and I + i*Omega >= 0.
inline CovarianceMatrix random_physical_state(std::mt19937_64& rng, double amplitude = 1.0) {
  std::normal_distribution<double> g(0.0, amplitude);
  Eigen::Matrix4d a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = g(rng);
  return CovarianceMatrix::from_matrix(Eigen::Matrix4d(a * a.transpose() + Eigen::Matrix4d::Identity()));
}

// Random physical symmetric-state variances. The canonical pairs of the
// sum/difference decomposition are (X-, Y-) and (X+, Y+), so physicality
// requires x_minus*y_minus >= 1 and x_plus*y_plus >= 1; squeezing X- forces
// the Y- excess and vice versa.
inline TwoModeVariances random_symmetric_variances(std::mt19937_64& rng, double max_squeeze_db = 12.0) {
  std::uniform_real_distribution<double> sq(0.0, max_squeeze_db);
  std::uniform_real_distribution<double> ex(0.0, 3.0);  // mixedness, dB
  TwoModeVariances v;
  const double s_diff = std::pow(10.0, -sq(rng) / 10.0);
  const double s_sum = std::pow(10.0, -sq(rng) / 10.0);
  v.x_minus = s_diff;
  v.y_minus = std::pow(10.0, ex(rng) / 10.0) / s_diff;
  v.y_plus = s_sum;
  v.x_plus = std::pow(10.0, ex(rng) / 10.0) / s_sum;
  return v;
}

// Random physical state whose optimal gains stay well inside the [-5, 5]
// scan window of the brute-force oracle.
inline CovarianceMatrix random_scan_safe_state(std::mt19937_64& rng) {
  for (;;) {
    const auto cm = random_physical_state(rng);
    const double wx = cm.cov(Quad::x1, Quad::x2) / cm.var(Quad::x2);
    const double wy = cm.cov(Quad::y1, Quad::y2) / cm.var(Quad::y2);
    if (std::abs(wx) <= 4.5 && std::abs(wy) <= 4.5) return cm;
  }
}

// Brute-force scan of Var(o1 - w*o2) over w in [-5, 5], step 1e-4. Evaluates
// the bilinear form directly from matrix entries.
struct ScanResult {
  double variance;
  double gain;
};

inline ScanResult scan_conditional_variance(const CovarianceMatrix& cm, Quad o1, Quad o2) {
  const double v1 = cm.var(o1);
  const double v2 = cm.var(o2);
  const double c = cm.cov(o1, o2);
  ScanResult best{1e300, 0.0};
  for (long i = -50000; i <= 50000; ++i) {
    const double w = static_cast<double>(i) * 1e-4;
    const double var = v1 - 2.0 * w * c + w * w * v2;
    if (var < best.variance) best = {var, w};
  }
  return best;
}

}  // namespace epr::testing

#pragma once

#include <Eigen/Dense>

#include <array>

namespace epr {

// Quadrature indices into the fixed (x1, y1, x2, y2) mode ordering.
// Channel 1 is the 852 nm signal mode, channel 2 the 1064 nm idler.
enum class Quad : int { x1 = 0, y1 = 1, x2 = 2, y2 = 3 };

// Reduce an angle to [0, 2*pi).
double wrap_angle(double theta);

// Relative phases theta_j between each OPO output and its local oscillator,
// stored reduced modulo 2*pi.
struct QuadratureAngles {
  QuadratureAngles() = default;
  QuadratureAngles(double t1, double t2);
  double theta1 = 0.0;
  double theta2 = 0.0;
};

// Variances of the joint combinations X± = (x1 ± x2)/√2 and Y± = (y1 ± y2)/√2,
// in shot-noise units (vacuum = 1).
struct TwoModeVariances {
  double x_minus = 1.0;
  double x_plus = 1.0;
  double y_minus = 1.0;
  double y_plus = 1.0;

  bool all_positive() const;
  // x_minus*x_plus >= 1 and y_minus*y_plus >= 1, required of physical
  // symmetric states.
  bool heisenberg_ok() const;
};

enum class Physicality { physical, marginal, unphysical };

// Second moments of a two-mode Gaussian state in shot-noise units
// (vacuum = identity, [x, y] = 2i). Symmetric by construction. Slightly
// unphysical matrices, as produced by finite-statistics reconstructions,
// are carried with a warning classification instead of being rejected.
class CovarianceMatrix {
 public:
  CovarianceMatrix() : m_(Eigen::Matrix4d::Identity()) {}

  static CovarianceMatrix vacuum() { return CovarianceMatrix(); }
  // Validates symmetry to 1e-12 relative tolerance, then symmetrizes exactly.
  static CovarianceMatrix from_matrix(const Eigen::Matrix4d& m);

  const Eigen::Matrix4d& matrix() const { return m_; }
  double var(Quad q) const;
  double cov(Quad a, Quad b) const;
  double determinant() const { return m_.determinant(); }
  bool positive_definite() const;

  // |eigenvalues| of Omega*V, one per mode, ascending; >= 1 for physical
  // states, with vacuum saturating at 1.
  std::array<double, 2> symplectic_eigenvalues() const;
  Physicality physicality() const;

 private:
  explicit CovarianceMatrix(const Eigen::Matrix4d& m) : m_(m) {}
  Eigen::Matrix4d m_;
};

// Build the symmetric two-mode state realizing the four combination variances:
// the sum and difference subspaces are independent single-mode squeezed states.
CovarianceMatrix symmetric_state(const TwoModeVariances& v);

// Extract the combination variances of an arbitrary two-mode state.
TwoModeVariances combination_variances(const CovarianceMatrix& cm);

// State purity mu = 1/sqrt(det V); equals 1 for pure Gaussian states.
double purity(const CovarianceMatrix& cm);

struct ConditionalVariance {
  double variance;  // min over w of Var(o1 - w*o2)
  double gain;      // the minimizing w
};

// Closed form of the gain-optimized conditional variance,
// Var(o1) - Cov(o1,o2)^2 / Var(o2) at w = Cov(o1,o2)/Var(o2).
ConditionalVariance conditional_variance(const CovarianceMatrix& cm, Quad o1, Quad o2);

struct ReidProduct {
  double e;  // product of the two minimized conditional standard deviations
  double e_squared;
  double gain_x;
  double gain_y;
  double cond_var_x;
  double cond_var_y;
  bool entangled() const { return e < 1.0; }
};

// Reid EPR criterion; the state is EPR-entangled (steerable) iff e < 1.
ReidProduct reid_product(const CovarianceMatrix& cm);

// Duan-Simon sum Var[(x1-x2)/√2] + Var[(y1+y2)/√2]; entangled iff < 2.
double duan_sum(const CovarianceMatrix& cm);

// Congruence transform by the per-mode phase-space rotations
// x_j(θ) = x_j cosθ + y_j sinθ, y_j(θ) = x_j(θ + π/2).
CovarianceMatrix rotate_quadratures(const CovarianceMatrix& cm, const QuadratureAngles& angles);

// Beam-splitter loss model V -> η V + (1-η) I, uniform over both modes.
CovarianceMatrix apply_uniform_efficiency(const CovarianceMatrix& cm, double eta);
// Same model with distinct per-mode efficiencies.
CovarianceMatrix apply_per_mode_efficiency(const CovarianceMatrix& cm, double eta1, double eta2);

// Undo the detector-efficiency map on a single variance: (v - 1)/η + 1.
double invert_efficiency(double v_measured, double eta);

}  // namespace epr

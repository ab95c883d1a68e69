#pragma once

#include <string>
#include <vector>

#include "epr/gaussian.hpp"

namespace epr {

// Per-channel efficiency budget. "optical" excludes the photodiode quantum
// efficiency, "total" includes it.
struct ChannelEfficiency {
  double lambda_nm = 0.0;
  double esc = 1.0;  // cavity escape
  double pro = 1.0;  // propagation to the detector
  double mm = 1.0;   // homodyne mode matching (visibility squared)
  double det = 1.0;  // photodiode quantum efficiency

  double optical() const { return esc * pro * mm; }
  double total() const { return optical() * det; }
  bool valid() const;
};

// Two-channel chain; cross-channel figures are geometric means.
struct EfficiencyChain {
  ChannelEfficiency ch1;  // 852 nm signal
  ChannelEfficiency ch2;  // 1064 nm idler

  double esc_mean() const;
  double det_mean() const;
  double optical_mean() const;
  double total_mean() const;
  bool valid() const { return ch1.valid() && ch2.valid(); }
};

struct CavityParams {
  double length_m = 0.390;  // ring round-trip length
  double output_coupler_T = 0.12;
  double loss_ch1 = 0.0021;  // 852 nm intracavity loss
  double loss_ch2 = 0.0015;  // 1064 nm intracavity loss
  double bandwidth_hz = 15.0e6;
  double fsr_hz = 769.0e6;
  double finesse = 52.0;
  double threshold_power_w = 0.320;
};

// Pump power as a fraction of the oscillation threshold; below-threshold only.
struct PumpSetting {
  double sigma = 0.0;
  static PumpSetting from_sigma(double sigma);
  static PumpSetting from_power(double power_w, double threshold_w);
};

struct PhaseNoise {
  double rms_rad = 0.0;
  double corner_hz = 1000.0;  // spectral corner of the jitter process
  bool small_angle() const { return rms_rad <= 0.3; }
};

struct NopoModel {
  CavityParams cavity;
  EfficiencyChain eff;
  PumpSetting pump;
  PhaseNoise phase_noise;
};

// Combination variances of the below-threshold NOPO at normalized sideband
// frequency omega_tilde = Omega/δν:
//   V_X± = 1 ± η 4√σ / (Ω̃² + (1 ∓ √σ)²),  V_Y± = 1 ∓ η 4√σ / (Ω̃² + (1 ± √σ)²)
// so that x_minus == y_plus and x_plus == y_minus exactly.
TwoModeVariances spectrum_pm(double sigma, double omega_tilde, double eta_tot);
// Same, taking the sideband frequency in Hz.
TwoModeVariances spectrum_at_frequency(double sigma, double f_hz, double bandwidth_hz,
                                       double eta_tot);

// RMS angular jitter projects the orthogonal quadrature into the measurement:
// V(δθ) = cos²(δθ) V_q + sin²(δθ) V_orth.
double apply_phase_noise(double v_q, double v_orthogonal, double delta_theta);

// Inverse of apply_phase_noise; v_measured must lie between the model values.
double infer_phase_noise(double v_measured, double v_sq_model, double v_asq_model);

struct SigmaOptimum {
  double sigma;
  double v_min;
};

// Pump ratio minimizing the jitter-degraded squeezed variance at fixed
// frequency. Golden-section search on [0, 1); ties break toward sigma = 0.
SigmaOptimum optimal_sigma(double eta_tot, double omega_tilde, double delta_theta);

// Single-beam cavity escape efficiency T/(T + loss).
double escape_efficiency(double T, double loss);

// SFG pump power gamma * p1 * p2 for conversion coefficient gamma in 1/W.
double sfg_pump_power(double p1_w, double p2_w, double gamma_per_w);

struct ConsistencyCheck {
  std::string name;
  double expected;
  double actual;
  double rel_residual;
  double tolerance;
  bool pass;
};

struct DerivedQuantity {
  std::string name;
  double value;
};

struct ConsistencyReport {
  std::vector<ConsistencyCheck> checks;
  std::vector<DerivedQuantity> derived;
  bool all_pass() const;
};

// Cross-checks the recorded FSR against c/length and the recorded finesse
// against FSR/bandwidth.
ConsistencyReport cavity_consistency(const CavityParams& c);

// Cross-checks the stored escape efficiencies against T/(T+loss) and reports
// the chain's geometric means.
ConsistencyReport efficiency_consistency(const CavityParams& c, const EfficiencyChain& chain);

// Model spectra with the phase-noise projection applied, at the measured
// level (detector included) and at the optical level (detector removed).
TwoModeVariances predicted_measured(const NopoModel& m, double f_hz);
TwoModeVariances predicted_optical(const NopoModel& m, double f_hz);

}  // namespace epr

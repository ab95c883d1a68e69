#include "epr/nopo.hpp"

#include <algorithm>
#include <cmath>

#include "epr/errors.hpp"
#include "epr/units.hpp"

namespace epr {

namespace {

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

// Jitter-degraded squeezed variance at fixed frequency, as a function of sigma.
double degraded_squeezing(double sigma, double omega_tilde, double eta_tot, double delta_theta) {
  const auto v = spectrum_pm(sigma, omega_tilde, eta_tot);
  return apply_phase_noise(v.x_minus, v.x_plus, delta_theta);
}

}  // namespace

bool ChannelEfficiency::valid() const {
  return in_unit_interval(esc) && in_unit_interval(pro) && in_unit_interval(mm) &&
         in_unit_interval(det);
}

double EfficiencyChain::esc_mean() const { return std::sqrt(ch1.esc * ch2.esc); }
double EfficiencyChain::det_mean() const { return std::sqrt(ch1.det * ch2.det); }
double EfficiencyChain::optical_mean() const { return std::sqrt(ch1.optical() * ch2.optical()); }
double EfficiencyChain::total_mean() const { return std::sqrt(ch1.total() * ch2.total()); }

PumpSetting PumpSetting::from_sigma(double sigma) {
  if (!(sigma >= 0.0) || sigma >= 1.0) {
    throw ValidationError("pump ratio must satisfy 0 <= sigma < 1 (below threshold)");
  }
  return {sigma};
}

PumpSetting PumpSetting::from_power(double power_w, double threshold_w) {
  if (threshold_w <= 0.0) throw ValidationError("threshold power must be positive");
  if (power_w < 0.0) throw ValidationError("pump power must be non-negative");
  return from_sigma(power_w / threshold_w);
}

TwoModeVariances spectrum_pm(double sigma, double omega_tilde, double eta_tot) {
  if (!(sigma >= 0.0)) throw ValidationError("sigma must be non-negative");
  if (sigma >= 1.0) throw ValidationError("sigma >= 1: above threshold, model invalid");
  if (omega_tilde < 0.0) throw ValidationError("omega_tilde must be non-negative");
  if (!in_unit_interval(eta_tot)) throw ValidationError("eta_tot must lie in [0, 1]");

  const double rs = std::sqrt(sigma);
  const double w2 = omega_tilde * omega_tilde;
  const double squeeze_lobe = 4.0 * rs / (w2 + (1.0 + rs) * (1.0 + rs));
  const double antisqueeze_lobe = 4.0 * rs / (w2 + (1.0 - rs) * (1.0 - rs));

  TwoModeVariances v;
  v.x_minus = 1.0 - eta_tot * squeeze_lobe;
  v.x_plus = 1.0 + eta_tot * antisqueeze_lobe;
  v.y_plus = v.x_minus;
  v.y_minus = v.x_plus;
  return v;
}

TwoModeVariances spectrum_at_frequency(double sigma, double f_hz, double bandwidth_hz,
                                       double eta_tot) {
  if (bandwidth_hz <= 0.0) throw ValidationError("cavity bandwidth must be positive");
  return spectrum_pm(sigma, f_hz / bandwidth_hz, eta_tot);
}

double apply_phase_noise(double v_q, double v_orthogonal, double delta_theta) {
  if (delta_theta < 0.0) throw ValidationError("delta_theta must be non-negative");
  const double c = std::cos(delta_theta);
  const double s = std::sin(delta_theta);
  return c * c * v_q + s * s * v_orthogonal;
}

double infer_phase_noise(double v_measured, double v_sq_model, double v_asq_model) {
  if (!(v_sq_model <= v_measured && v_measured <= v_asq_model)) {
    throw ValidationError("infer_phase_noise: measured variance outside the model bracket");
  }
  const double span = v_asq_model - v_sq_model;
  if (span <= 0.0) return 0.0;  // degenerate bracket, any angle works
  return std::asin(std::sqrt((v_measured - v_sq_model) / span));
}

SigmaOptimum optimal_sigma(double eta_tot, double omega_tilde, double delta_theta) {
  if (!in_unit_interval(eta_tot)) throw ValidationError("eta_tot must lie in [0, 1]");
  if (eta_tot == 0.0) return {0.0, 1.0};  // no light: flat objective, tie-break at 0

  auto objective = [&](double sigma) {
    return degraded_squeezing(sigma, omega_tilde, eta_tot, delta_theta);
  };

  // golden-section search, fixed iteration budget for reproducibility
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = 1.0 - 1e-6;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = objective(a), fb = objective(b);
  for (int iter = 0; iter < 64 && hi - lo > 1e-9; ++iter) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = objective(b);
    }
  }
  double sigma_star = 0.5 * (lo + hi);
  double v_min = objective(sigma_star);
  // flat or monotone-increasing objectives resolve to sigma = 0
  const double v0 = objective(0.0);
  if (v0 <= v_min + 1e-15) return {0.0, v0};
  return {sigma_star, v_min};
}

double escape_efficiency(double T, double loss) {
  if (T <= 0.0) throw ValidationError("output-coupler transmission must be positive");
  if (loss < 0.0) throw ValidationError("intracavity loss must be non-negative");
  return T / (T + loss);
}

double sfg_pump_power(double p1_w, double p2_w, double gamma_per_w) {
  if (p1_w < 0.0 || p2_w < 0.0) throw ValidationError("laser powers must be non-negative");
  return gamma_per_w * p1_w * p2_w;
}

bool ConsistencyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConsistencyCheck& c) { return c.pass; });
}

namespace {

ConsistencyCheck make_check(std::string name, double expected, double actual, double tol) {
  const double residual = std::abs(actual - expected) / std::abs(expected);
  return {std::move(name), expected, actual, residual, tol, residual <= tol};
}

}  // namespace

ConsistencyReport cavity_consistency(const CavityParams& c) {
  ConsistencyReport report;
  if (c.length_m <= 0.0) throw ValidationError("cavity length must be positive");
  const double fsr_derived = kSpeedOfLight / c.length_m;
  report.checks.push_back(make_check("fsr_vs_c_over_length", c.fsr_hz, fsr_derived, 0.01));
  if (c.bandwidth_hz > 0.0) {
    const double finesse_derived = c.fsr_hz / c.bandwidth_hz;
    report.checks.push_back(make_check("finesse_vs_fsr_over_bandwidth", c.finesse, finesse_derived, 0.05));
  }
  report.derived.push_back({"fsr_derived_hz", fsr_derived});
  report.derived.push_back({"finesse_derived", c.fsr_hz / c.bandwidth_hz});
  return report;
}

ConsistencyReport efficiency_consistency(const CavityParams& c, const EfficiencyChain& chain) {
  ConsistencyReport report;
  const double esc1 = escape_efficiency(c.output_coupler_T, c.loss_ch1);
  const double esc2 = escape_efficiency(c.output_coupler_T, c.loss_ch2);
  report.checks.push_back(make_check("escape_efficiency_ch1", chain.ch1.esc, esc1, 0.002));
  report.checks.push_back(make_check("escape_efficiency_ch2", chain.ch2.esc, esc2, 0.002));
  report.checks.push_back(
      make_check("escape_efficiency_mean", chain.esc_mean(), std::sqrt(esc1 * esc2), 0.002));
  report.derived.push_back({"escape_efficiency_ch1_derived", esc1});
  report.derived.push_back({"escape_efficiency_ch2_derived", esc2});
  report.derived.push_back({"escape_efficiency_geometric_mean", std::sqrt(esc1 * esc2)});
  report.derived.push_back({"detector_efficiency_geometric_mean", chain.det_mean()});
  report.derived.push_back({"optical_efficiency_geometric_mean", chain.optical_mean()});
  report.derived.push_back({"total_efficiency_geometric_mean", chain.total_mean()});
  return report;
}

namespace {

TwoModeVariances degraded(const NopoModel& m, double f_hz, double eta) {
  const auto v = spectrum_at_frequency(m.pump.sigma, f_hz, m.cavity.bandwidth_hz, eta);
  const double dt = m.phase_noise.rms_rad;
  TwoModeVariances out;
  out.x_minus = apply_phase_noise(v.x_minus, v.x_plus, dt);
  out.x_plus = apply_phase_noise(v.x_plus, v.x_minus, dt);
  out.y_plus = apply_phase_noise(v.y_plus, v.y_minus, dt);
  out.y_minus = apply_phase_noise(v.y_minus, v.y_plus, dt);
  return out;
}

}  // namespace

TwoModeVariances predicted_measured(const NopoModel& m, double f_hz) {
  return degraded(m, f_hz, m.eff.total_mean());
}

TwoModeVariances predicted_optical(const NopoModel& m, double f_hz) {
  return degraded(m, f_hz, m.eff.optical_mean());
}

}  // namespace epr

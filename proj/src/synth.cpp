#include "epr/synth.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <sstream>

#include "epr/errors.hpp"
#include "epr/random.hpp"
#include "epr/units.hpp"

namespace epr {

namespace {

// substream tags; every random component of a trace draws from its own stream
enum Stream : std::uint64_t {
  kXminus = 1,
  kXplus = 2,
  kYplus = 3,
  kYminus = 4,
  kJitter = 5,
  kVacuum1 = 6,
  kVacuum2 = 7,
  kElectronic1 = 8,
  kElectronic2 = 9,
  kLoNoise1 = 10,
  kLoNoise2 = 11,
  kPeakPhases = 12,
};

std::size_t checked_sample_count(const SynthConfig& cfg) {
  if (cfg.sample_rate_hz <= 0.0) throw ValidationError("sample rate must be positive");
  if (cfg.duration_s <= 0.0) throw ValidationError("duration must be positive");
  const double n = cfg.duration_s * cfg.sample_rate_hz;
  if (n > 9.0e15) throw ValidationError("trace length overflows the 64-bit sample count");
  const auto count = static_cast<std::uint64_t>(std::llround(n));
  if (count < 16) throw ValidationError("trace too short: fewer than 16 samples");
  return static_cast<std::size_t>(count);
}

// Stationary Gaussian process with one-sided target spectrum s(f) in
// shot-noise units: independent complex Gaussian bin amplitudes with the
// target variance, Hermitian symmetry enforced by the real inverse transform.
std::vector<double> gaussian_field(std::size_t n, double fs, std::uint64_t seed,
                                   const std::function<double(double)>& s) {
  const std::size_t bins = n / 2 + 1;
  std::vector<std::complex<double>> spec(bins);
  GaussianStream g(seed);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    const double sk = s(f);
    if (sk < 0.0) throw ValidationError("negative target spectrum");
    const bool self_conjugate = (k == 0) || (n % 2 == 0 && k == n / 2);
    if (self_conjugate) {
      spec[k] = {std::sqrt(static_cast<double>(n) * sk) * g.normal(), 0.0};
    } else {
      const double amp = std::sqrt(0.5 * static_cast<double>(n) * sk);
      spec[k] = {amp * g.normal(), amp * g.normal()};
    }
  }

  std::vector<double> out(n);
  fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                        reinterpret_cast<fftw_complex*>(spec.data()), out.data(),
                                        FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
  if (plan == nullptr) throw ValidationError("FFT plan creation failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

double lo_leakage_psd(const SynthConfig& cfg, double f) {
  const auto& lo = cfg.lo_noise;
  const double flat = from_db(lo.flat_db);
  const double fmin = std::max(f, lo.clamp_hz);
  const double tmpl = (fmin >= lo.corner_hz) ? flat : flat * lo.corner_hz / fmin;
  return tmpl * from_db(-cfg.cmrr_db);
}

std::string base_metadata(const SynthConfig& cfg, const char* role) {
  std::ostringstream os;
  os.precision(17);
  os << "role = " << role << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "sample_rate_hz = " << cfg.sample_rate_hz << "\n";
  os << "duration_s = " << cfg.duration_s << "\n";
  os << "lo_theta1_rad = " << cfg.lo_angles.theta1 << "\n";
  os << "lo_theta2_rad = " << cfg.lo_angles.theta2 << "\n";
  os << "model.sigma = " << cfg.model.pump.sigma << "\n";
  os << "model.bandwidth_hz = " << cfg.model.cavity.bandwidth_hz << "\n";
  os << "model.eta_total_mean = " << cfg.model.eff.total_mean() << "\n";
  os << "model.phase_noise_rms_rad = " << cfg.model.phase_noise.rms_rad << "\n";
  os << "model.phase_noise_corner_hz = " << cfg.model.phase_noise.corner_hz << "\n";
  os << "electronic_noise_db = "
     << (cfg.electronic_noise_enabled ? cfg.electronic_noise_db
                                      : -std::numeric_limits<double>::infinity())
     << "\n";
  os << "cmrr_db = " << cfg.cmrr_db << "\n";
  if (!cfg.metadata_extra.empty()) os << cfg.metadata_extra;
  return os.str();
}

void add_white_noise(std::vector<double>& samples, std::uint64_t seed, double variance) {
  if (variance <= 0.0) return;
  GaussianStream g(seed);
  const double sd = std::sqrt(variance);
  for (auto& v : samples) v += sd * g.normal();
}

void add_peaks(const SynthConfig& cfg, std::vector<double>& i1, std::vector<double>& i2) {
  if (cfg.peaks.empty()) return;
  GaussianStream g(mix_seed(cfg.seed, kPeakPhases));
  for (const auto& peak : cfg.peaks) {
    // each laser line carries its own phase per channel
    const double phase1 = kTwoPi * g.uniform();
    const double phase2 = kTwoPi * g.uniform();
    const double w = kTwoPi * peak.freq_hz / cfg.sample_rate_hz;
    for (std::size_t k = 0; k < i1.size(); ++k) {
      i1[k] += peak.amplitude * std::sin(w * static_cast<double>(k) + phase1);
      i2[k] += peak.amplitude * std::sin(w * static_cast<double>(k) + phase2);
    }
  }
}

void add_lo_noise(const SynthConfig& cfg, std::vector<double>& i1, std::vector<double>& i2) {
  if (!cfg.lo_noise.enabled) return;
  const std::size_t n = i1.size();
  auto psd = [&](double f) { return lo_leakage_psd(cfg, f); };
  const auto l1 = gaussian_field(n, cfg.sample_rate_hz, mix_seed(cfg.seed, kLoNoise1), psd);
  for (std::size_t k = 0; k < n; ++k) i1[k] += l1[k];
  const auto l2 = gaussian_field(n, cfg.sample_rate_hz, mix_seed(cfg.seed, kLoNoise2), psd);
  for (std::size_t k = 0; k < n; ++k) i2[k] += l2[k];
}

}  // namespace

QuadratureTraceSet synthesize(const SynthConfig& cfg, SynthDiagnostics* diag) {
  const std::size_t n = checked_sample_count(cfg);
  if (cfg.model.pump.sigma >= 1.0 || cfg.model.pump.sigma < 0.0) {
    throw ValidationError("model invalid: pump ratio must satisfy 0 <= sigma < 1");
  }
  if (!cfg.model.eff.valid()) throw ValidationError("efficiency factors must lie in [0, 1]");

  const double fs = cfg.sample_rate_hz;
  const double eta = cfg.model.eff.total_mean();
  const double sigma = cfg.model.pump.sigma;
  const double bw = cfg.model.cavity.bandwidth_hz;

  auto combo = [&](int which) {
    return [=](double f) {
      const auto v = spectrum_at_frequency(sigma, f, bw, eta);
      switch (which) {
        case 0: return v.x_minus;
        case 1: return v.x_plus;
        case 2: return v.y_plus;
        default: return v.y_minus;
      }
    };
  };

  // independent squeezed subspaces, then back to per-mode quadratures
  auto x1 = gaussian_field(n, fs, mix_seed(cfg.seed, kXminus), combo(0));   // X- for now
  auto x2 = gaussian_field(n, fs, mix_seed(cfg.seed, kXplus), combo(1));    // X+ for now
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  for (std::size_t k = 0; k < n; ++k) {
    const double xm = x1[k], xp = x2[k];
    x1[k] = (xp + xm) * inv_sqrt2;
    x2[k] = (xp - xm) * inv_sqrt2;
  }
  auto y1 = gaussian_field(n, fs, mix_seed(cfg.seed, kYplus), combo(2));    // Y+ for now
  auto y2 = gaussian_field(n, fs, mix_seed(cfg.seed, kYminus), combo(3));   // Y- for now
  for (std::size_t k = 0; k < n; ++k) {
    const double yp = y1[k], ym = y2[k];
    y1[k] = (yp + ym) * inv_sqrt2;
    y2[k] = (yp - ym) * inv_sqrt2;
  }

  // slow common phase jitter rotates both modes; the LO angle then selects
  // the measured quadrature
  const double jitter_rms = cfg.model.phase_noise.rms_rad;
  const double corner = cfg.model.phase_noise.corner_hz;
  GaussianStream jg(mix_seed(cfg.seed, kJitter));
  const double rho = (jitter_rms > 0.0) ? std::exp(-kTwoPi * corner / fs) : 0.0;
  const double innovation_sd = jitter_rms * std::sqrt(1.0 - rho * rho);
  double phi = (jitter_rms > 0.0) ? jitter_rms * jg.normal() : 0.0;
  double sumsq = 0.0;
  const double t1 = cfg.lo_angles.theta1;
  const double t2 = cfg.lo_angles.theta2;
  for (std::size_t k = 0; k < n; ++k) {
    if (jitter_rms > 0.0 && k > 0) phi = rho * phi + innovation_sd * jg.normal();
    sumsq += phi * phi;
    const double c1 = std::cos(t1 + phi), s1 = std::sin(t1 + phi);
    const double c2 = std::cos(t2 + phi), s2 = std::sin(t2 + phi);
    x1[k] = x1[k] * c1 + y1[k] * s1;
    x2[k] = x2[k] * c2 + y2[k] * s2;
  }
  y1.clear();
  y1.shrink_to_fit();
  y2.clear();
  y2.shrink_to_fit();
  if (diag != nullptr) diag->realized_jitter_rms = std::sqrt(sumsq / static_cast<double>(n));

  add_peaks(cfg, x1, x2);
  if (cfg.electronic_noise_enabled) {
    const double ev = from_db(cfg.electronic_noise_db);
    add_white_noise(x1, mix_seed(cfg.seed, kElectronic1), ev);
    add_white_noise(x2, mix_seed(cfg.seed, kElectronic2), ev);
  }
  add_lo_noise(cfg, x1, x2);

  QuadratureTraceSet trace;
  trace.ch1 = std::move(x1);
  trace.ch2 = std::move(x2);
  trace.sample_rate_hz = fs;
  trace.lo_angles = cfg.lo_angles;
  trace.metadata = base_metadata(cfg, "signal");
  return trace;
}

QuadratureTraceSet shot_noise_reference(const SynthConfig& cfg) {
  const std::size_t n = checked_sample_count(cfg);
  const double ev =
      cfg.electronic_noise_enabled ? from_db(cfg.electronic_noise_db) : 0.0;
  const double sd = std::sqrt(1.0 + ev);

  QuadratureTraceSet trace;
  trace.ch1.resize(n);
  trace.ch2.resize(n);
  GaussianStream g1(mix_seed(cfg.seed, kVacuum1));
  GaussianStream g2(mix_seed(cfg.seed, kVacuum2));
  for (std::size_t k = 0; k < n; ++k) {
    trace.ch1[k] = sd * g1.normal();
    trace.ch2[k] = sd * g2.normal();
  }
  trace.sample_rate_hz = cfg.sample_rate_hz;
  trace.lo_angles = cfg.lo_angles;
  trace.metadata = base_metadata(cfg, "shot_reference");
  return trace;
}

QuadratureTraceSet dark_trace(const SynthConfig& cfg) {
  const std::size_t n = checked_sample_count(cfg);
  QuadratureTraceSet trace;
  trace.ch1.assign(n, 0.0);
  trace.ch2.assign(n, 0.0);
  if (cfg.electronic_noise_enabled) {
    const double ev = from_db(cfg.electronic_noise_db);
    add_white_noise(trace.ch1, mix_seed(cfg.seed, kElectronic1), ev);
    add_white_noise(trace.ch2, mix_seed(cfg.seed, kElectronic2), ev);
  }
  trace.sample_rate_hz = cfg.sample_rate_hz;
  trace.lo_angles = cfg.lo_angles;
  trace.metadata = base_metadata(cfg, "dark");
  return trace;
}

}  // namespace epr

#pragma once

#include <vector>

#include "epr/trace.hpp"

namespace epr {

// Demodulated (I, Q) envelope pairs for both channels, decimated to
// approximately four times the low-pass cutoff. Units are normalized so a
// flat shot-noise input gives unit envelope variance.
struct DemodResult {
  double sample_rate_hz = 0.0;
  std::vector<double> i1, q1, i2, q2;
};

// Lock-in style demodulation: mix with cos/sin at f_demod, windowed-sinc
// low-pass at lpf_cutoff, decimate.
DemodResult demodulate(const QuadratureTraceSet& trace, double f_demod_hz, double lpf_cutoff_hz);

enum class WelchWindow { rectangular, hann };

// Averaged periodograms of both channels plus their normalized sum/difference
// combinations and the complex cross-spectrum. Raw linear power units
// (a white series of variance v gives a flat spectrum at v); one-sided grid.
struct RawSpectrum {
  double sample_rate_hz = 0.0;
  int fft_length = 0;
  int n_averages = 0;
  std::vector<double> freq_hz;
  // per-bin means
  std::vector<double> ch1, ch2, sum, diff;
  std::vector<double> cross_re, cross_im;
  // per-bin variance of the mean (empirical spread over segments)
  std::vector<double> ch1_sem2, ch2_sem2, sum_sem2, diff_sem2;

  double rbw_hz() const { return sample_rate_hz / fft_length; }
  bool grid_matches(const RawSpectrum& other) const;
};

// Non-overlapping segment periodograms, averaged. n_averages is an upper
// bound; the trace must contain at least one full segment. sum/diff are the
// (ch1 ± ch2)/√2 combinations.
RawSpectrum welch_spectra(const QuadratureTraceSet& trace, int fft_length, int n_averages,
                          WelchWindow window = WelchWindow::rectangular);

// Time-domain combination variance Var(ch1 - w*ch2).
double combined_variance(const QuadratureTraceSet& trace, double w);

// Band-averaged spectral bilinear form S11 + w^2 S22 - 2 w Re S12 over
// [f_lo, f_hi].
double spectral_combined_variance(const RawSpectrum& s, double w, double f_lo, double f_hi);

// Sample variance / covariance helpers (mean removed).
double sample_variance(const std::vector<double>& x);
double sample_covariance(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace epr

#include "epr/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "epr/errors.hpp"
#include "epr/units.hpp"

namespace epr {

namespace {

void check_two_channels(const QuadratureTraceSet& trace) {
  if (trace.ch1.size() != trace.ch2.size()) {
    throw ValidationError("trace channels have mismatched lengths");
  }
  if (trace.sample_rate_hz <= 0.0) throw ValidationError("trace sample rate must be positive");
}

// Hamming-windowed sinc low-pass, unit DC gain.
std::vector<double> lowpass_taps(double cutoff_hz, double fs, int taps) {
  std::vector<double> h(taps);
  const double fc = cutoff_hz / fs;  // cycles per sample
  const int mid = (taps - 1) / 2;
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    const int m = i - mid;
    const double sinc = (m == 0) ? 2.0 * fc : std::sin(kTwoPi * fc * m) / (kPi * m);
    const double window = 0.54 - 0.46 * std::cos(kTwoPi * i / (taps - 1));
    h[i] = sinc * window;
    sum += h[i];
  }
  for (auto& v : h) v /= sum;
  return h;
}

struct Accumulator {
  std::vector<double> mean;
  std::vector<double> m2;
  long n = 0;

  explicit Accumulator(std::size_t bins) : mean(bins, 0.0), m2(bins, 0.0) {}

  void add(const std::vector<double>& sample) {
    ++n;
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const double delta = sample[k] - mean[k];
      mean[k] += delta / static_cast<double>(n);
      m2[k] += delta * (sample[k] - mean[k]);
    }
  }

  std::vector<double> sem2() const {
    std::vector<double> out(mean.size(), 0.0);
    if (n > 1) {
      const double denom = static_cast<double>(n) * static_cast<double>(n - 1);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = m2[k] / denom;
    }
    return out;
  }
};

}  // namespace

bool RawSpectrum::grid_matches(const RawSpectrum& other) const {
  return fft_length == other.fft_length && sample_rate_hz == other.sample_rate_hz;
}

DemodResult demodulate(const QuadratureTraceSet& trace, double f_demod_hz, double lpf_cutoff_hz) {
  check_two_channels(trace);
  const double fs = trace.sample_rate_hz;
  if (f_demod_hz <= 0.0 || lpf_cutoff_hz <= 0.0) {
    throw ValidationError("demodulation frequency and cutoff must be positive");
  }
  if (f_demod_hz + lpf_cutoff_hz >= 0.5 * fs) {
    throw ValidationError("aliasing: f_demod + lpf_cutoff must stay below sample_rate/2");
  }

  int taps = static_cast<int>(std::lround(4.0 * fs / lpf_cutoff_hz)) | 1;
  taps = std::clamp(taps, 31, 32001);
  const auto h = lowpass_taps(lpf_cutoff_hz, fs, taps);
  if (static_cast<std::size_t>(taps) > trace.ch1.size()) {
    throw ValidationError("trace shorter than the demodulation filter");
  }

  // white-noise power gain; dividing by its square root makes shot noise
  // come out at unit envelope variance
  double power_gain = 0.0;
  for (double v : h) power_gain += v * v;
  const double norm = 1.0 / std::sqrt(power_gain);

  const int decim = std::max(1, static_cast<int>(fs / (4.0 * lpf_cutoff_hz)));
  const double w0 = kTwoPi * f_demod_hz / fs;
  const std::size_t n = trace.ch1.size();
  const std::size_t n_out = (n - taps) / decim + 1;

  DemodResult out;
  out.sample_rate_hz = fs / decim;
  out.i1.resize(n_out);
  out.q1.resize(n_out);
  out.i2.resize(n_out);
  out.q2.resize(n_out);

  constexpr double sqrt2 = 1.41421356237309504880;
  for (std::size_t m = 0; m < n_out; ++m) {
    const std::size_t n0 = m * decim;  // filter spans [n0, n0 + taps)
    double acc_i1 = 0.0, acc_q1 = 0.0, acc_i2 = 0.0, acc_q2 = 0.0;
    for (int k = 0; k < taps; ++k) {
      const std::size_t idx = n0 + k;
      const double phase = w0 * static_cast<double>(idx);
      const double c = std::cos(phase) * sqrt2;
      const double s = std::sin(phase) * sqrt2;
      const double hk = h[taps - 1 - k];
      acc_i1 += hk * trace.ch1[idx] * c;
      acc_q1 += hk * trace.ch1[idx] * s;
      acc_i2 += hk * trace.ch2[idx] * c;
      acc_q2 += hk * trace.ch2[idx] * s;
    }
    out.i1[m] = acc_i1 * norm;
    out.q1[m] = acc_q1 * norm;
    out.i2[m] = acc_i2 * norm;
    out.q2[m] = acc_q2 * norm;
  }
  return out;
}

RawSpectrum welch_spectra(const QuadratureTraceSet& trace, int fft_length, int n_averages,
                          WelchWindow window) {
  check_two_channels(trace);
  if (fft_length < 8) throw ValidationError("fft_length must be at least 8");
  if (n_averages < 1) throw ValidationError("n_averages must be at least 1");
  const std::size_t n = trace.ch1.size();
  const auto m = static_cast<std::size_t>(fft_length);
  if (n < m) {
    throw ValidationError("insufficient samples: trace length " + std::to_string(n) +
                          " below fft_length " + std::to_string(fft_length));
  }
  const long segments = std::min<long>(n_averages, static_cast<long>(n / m));
  const std::size_t bins = m / 2 + 1;

  std::vector<double> win(m, 1.0);
  if (window == WelchWindow::hann) {
    for (std::size_t i = 0; i < m; ++i) {
      win[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(m)));
    }
  }
  double wpow = 0.0;
  for (double v : win) wpow += v * v;  // rectangular: m

  std::vector<double> buf(m);
  std::vector<std::complex<double>> f1(bins), f2(bins);
  fftw_plan plan1 = fftw_plan_dft_r2c_1d(fft_length, buf.data(),
                                         reinterpret_cast<fftw_complex*>(f1.data()), FFTW_ESTIMATE);
  fftw_plan plan2 = fftw_plan_dft_r2c_1d(fft_length, buf.data(),
                                         reinterpret_cast<fftw_complex*>(f2.data()), FFTW_ESTIMATE);
  if (plan1 == nullptr || plan2 == nullptr) throw ValidationError("FFT plan creation failed");

  Accumulator a1(bins), a2(bins), as(bins), ad(bins), acr(bins), aci(bins);
  std::vector<double> p1(bins), p2(bins), ps(bins), pd(bins), cr(bins), ci(bins);

  for (long seg = 0; seg < segments; ++seg) {
    const std::size_t off = static_cast<std::size_t>(seg) * m;
    for (std::size_t i = 0; i < m; ++i) buf[i] = trace.ch1[off + i] * win[i];
    fftw_execute(plan1);
    for (std::size_t i = 0; i < m; ++i) buf[i] = trace.ch2[off + i] * win[i];
    fftw_execute(plan2);

    for (std::size_t k = 0; k < bins; ++k) {
      const auto z1 = f1[k];
      const auto z2 = f2[k];
      p1[k] = std::norm(z1) / wpow;
      p2[k] = std::norm(z2) / wpow;
      ps[k] = std::norm(z1 + z2) / (2.0 * wpow);
      pd[k] = std::norm(z1 - z2) / (2.0 * wpow);
      const auto c = z1 * std::conj(z2);
      cr[k] = c.real() / wpow;
      ci[k] = c.imag() / wpow;
    }
    a1.add(p1);
    a2.add(p2);
    as.add(ps);
    ad.add(pd);
    acr.add(cr);
    aci.add(ci);
  }
  fftw_destroy_plan(plan1);
  fftw_destroy_plan(plan2);

  RawSpectrum out;
  out.sample_rate_hz = trace.sample_rate_hz;
  out.fft_length = fft_length;
  out.n_averages = static_cast<int>(segments);
  out.freq_hz.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    out.freq_hz[k] = static_cast<double>(k) * trace.sample_rate_hz / fft_length;
  }
  out.ch1_sem2 = a1.sem2();
  out.ch2_sem2 = a2.sem2();
  out.sum_sem2 = as.sem2();
  out.diff_sem2 = ad.sem2();
  out.ch1 = std::move(a1.mean);
  out.ch2 = std::move(a2.mean);
  out.sum = std::move(as.mean);
  out.diff = std::move(ad.mean);
  out.cross_re = std::move(acr.mean);
  out.cross_im = std::move(aci.mean);
  return out;
}

double combined_variance(const QuadratureTraceSet& trace, double w) {
  check_two_channels(trace);
  if (trace.ch1.empty()) throw ValidationError("empty trace");
  std::vector<double> combo(trace.ch1.size());
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = trace.ch1[i] - w * trace.ch2[i];
  return sample_variance(combo);
}

double spectral_combined_variance(const RawSpectrum& s, double w, double f_lo, double f_hi) {
  if (f_lo >= f_hi) throw ValidationError("band limits must satisfy f_lo < f_hi");
  double acc = 0.0;
  long count = 0;
  for (std::size_t k = 0; k < s.freq_hz.size(); ++k) {
    if (s.freq_hz[k] < f_lo || s.freq_hz[k] > f_hi) continue;
    acc += s.ch1[k] + w * w * s.ch2[k] - 2.0 * w * s.cross_re[k];
    ++count;
  }
  if (count == 0) throw ValidationError("band contains no spectrum bins");
  return acc / static_cast<double>(count);
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) throw ValidationError("variance needs at least two samples");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size() - 1);
}

double sample_covariance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("covariance needs equal-length series");
  if (x.size() < 2) throw ValidationError("covariance needs at least two samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - mx) * (y[i] - my);
  return acc / static_cast<double>(x.size() - 1);
}

}  // namespace epr

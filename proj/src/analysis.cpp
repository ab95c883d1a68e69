#include "epr/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "epr/errors.hpp"
#include "epr/units.hpp"

namespace epr {

namespace {

constexpr double kFloor = 1e-15;  // spectra stay positive after correction

struct Series {
  const std::vector<double>* mean;
  const std::vector<double>* sem2;
};

// u = (s - d) / (r - d) with first-order error propagation.
CombinationSpectrum normalize_series(const Series& sig, const Series& ref, const Series* dark) {
  const std::size_t bins = sig.mean->size();
  CombinationSpectrum out;
  out.linear.resize(bins);
  out.sem.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double d = dark != nullptr ? (*dark->mean)[k] : 0.0;
    const double dvar = dark != nullptr ? (*dark->sem2)[k] : 0.0;
    const double num = (*sig.mean)[k] - d;
    const double den = std::max((*ref.mean)[k] - d, kFloor);
    const double u = std::max(num / den, kFloor);
    const double du_ds2 = (*sig.sem2)[k] / (den * den);
    const double du_dr2 = (*ref.sem2)[k] * u * u / (den * den);
    const double dd = ((*sig.mean)[k] - (*ref.mean)[k]) / (den * den);
    const double du_dd2 = dvar * dd * dd;
    out.linear[k] = u;
    out.sem[k] = std::sqrt(du_ds2 + du_dr2 + du_dd2);
  }
  return out;
}

std::vector<double> normalize_cross(const RawSpectrum& run, const RawSpectrum& ref,
                                    const RawSpectrum* dark) {
  std::vector<double> out(run.cross_re.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double d1 = dark != nullptr ? dark->ch1[k] : 0.0;
    const double d2 = dark != nullptr ? dark->ch2[k] : 0.0;
    const double den =
        std::sqrt(std::max(ref.ch1[k] - d1, kFloor) * std::max(ref.ch2[k] - d2, kFloor));
    out[k] = run.cross_re[k] / den;  // independent dark channels: zero-mean cross
  }
  return out;
}

void require_same_grid(const RawSpectrum& a, const RawSpectrum& b, const char* what) {
  if (!a.grid_matches(b)) {
    throw ValidationError(std::string("spectrum grids do not match: ") + what);
  }
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

struct BandAverage {
  double mean;
  double sem;
  int used;
  int masked;
};

// Linear mean over the band with a median-absolute-deviation outlier mask
// (narrow spectral lines are excluded from band averages).
BandAverage band_average(const CombinationSpectrum& spec, const std::vector<double>& freq,
                         double f_lo, double f_hi, double mad_threshold) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < freq.size(); ++k) {
    if (freq[k] >= f_lo && freq[k] <= f_hi) idx.push_back(k);
  }
  if (idx.empty()) throw ValidationError("band contains no spectrum bins");

  std::vector<char> keep(idx.size(), 1);
  int masked = 0;
  if (mad_threshold > 0.0 && idx.size() >= 8) {
    std::vector<double> vals(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) vals[i] = spec.linear[idx[i]];
    const double med = median_of(vals);
    std::vector<double> dev(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) dev[i] = std::fabs(vals[i] - med);
    const double mad = median_of(dev);
    if (mad > 0.0) {
      for (std::size_t i = 0; i < vals.size(); ++i) {
        if (std::fabs(vals[i] - med) > mad_threshold * mad) {
          keep[i] = 0;
          ++masked;
        }
      }
    }
  }

  double acc = 0.0, acc_sem2 = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (!keep[i]) continue;
    acc += spec.linear[idx[i]];
    acc_sem2 += spec.sem[idx[i]] * spec.sem[idx[i]];
    ++used;
  }
  if (used == 0) throw ValidationError("outlier mask removed every bin in the band");
  const double mean = acc / used;
  const double sem = std::sqrt(acc_sem2) / used;
  return {mean, sem, used, masked};
}

// first-order uncertainty of f(v) under independent variance errors
template <typename F>
double propagate_sem(const std::array<double, 4>& v, const std::array<double, 4>& sem, F f) {
  const double base = f(v);
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (sem[i] <= 0.0) continue;
    std::array<double, 4> up = v;
    const double h = 1e-6 * std::max(std::fabs(v[i]), 1e-12);
    up[i] = v[i] + h;
    const double slope = (f(up) - base) / h;
    acc += slope * slope * sem[i] * sem[i];
  }
  return std::sqrt(acc);
}

}  // namespace

double VarianceEstimate::db() const { return to_db(linear); }

double VarianceEstimate::sem_db() const {
  return linear > 0.0 ? 10.0 / std::log(10.0) * sem / linear : 0.0;
}

SpectrumSet normalized_spectra(const RawSpectrum& x_run, const RawSpectrum& y_run,
                               const RawSpectrum& shot_ref, const RawSpectrum* dark,
                               bool electronic_correction) {
  require_same_grid(x_run, shot_ref, "x run vs shot reference");
  require_same_grid(y_run, shot_ref, "y run vs shot reference");
  if (dark != nullptr) require_same_grid(*dark, shot_ref, "dark vs shot reference");
  const bool correct = electronic_correction && dark != nullptr;
  const RawSpectrum* d = correct ? dark : nullptr;

  auto series = [](const std::vector<double>& m, const std::vector<double>& s2) {
    return Series{&m, &s2};
  };

  SpectrumSet out;
  out.freq_hz = shot_ref.freq_hz;
  out.rbw_hz = shot_ref.rbw_hz();
  out.n_averages = std::min(x_run.n_averages, y_run.n_averages);
  out.electronic_corrected = correct;

  // combination references: (ref1 + ref2)/2 is the shot level of (i1 ∓ i2)/√2
  const Series ref_sum = series(shot_ref.sum, shot_ref.sum_sem2);
  const Series ref_diff = series(shot_ref.diff, shot_ref.diff_sem2);
  const Series* dark_sum = nullptr;
  const Series* dark_diff = nullptr;
  Series dark_sum_storage{}, dark_diff_storage{};
  if (d != nullptr) {
    dark_sum_storage = series(d->sum, d->sum_sem2);
    dark_diff_storage = series(d->diff, d->diff_sem2);
    dark_sum = &dark_sum_storage;
    dark_diff = &dark_diff_storage;
  }

  out.combos[static_cast<int>(Combo::x_minus)] =
      normalize_series(series(x_run.diff, x_run.diff_sem2), ref_diff, dark_diff);
  out.combos[static_cast<int>(Combo::x_plus)] =
      normalize_series(series(x_run.sum, x_run.sum_sem2), ref_sum, dark_sum);
  out.combos[static_cast<int>(Combo::y_plus)] =
      normalize_series(series(y_run.sum, y_run.sum_sem2), ref_sum, dark_sum);
  out.combos[static_cast<int>(Combo::y_minus)] =
      normalize_series(series(y_run.diff, y_run.diff_sem2), ref_diff, dark_diff);

  const Series ref1 = series(shot_ref.ch1, shot_ref.ch1_sem2);
  const Series ref2 = series(shot_ref.ch2, shot_ref.ch2_sem2);
  const Series* dark1 = nullptr;
  const Series* dark2 = nullptr;
  Series dark1_storage{}, dark2_storage{};
  if (d != nullptr) {
    dark1_storage = series(d->ch1, d->ch1_sem2);
    dark2_storage = series(d->ch2, d->ch2_sem2);
    dark1 = &dark1_storage;
    dark2 = &dark2_storage;
  }
  out.ch1_x = normalize_series(series(x_run.ch1, x_run.ch1_sem2), ref1, dark1);
  out.ch2_x = normalize_series(series(x_run.ch2, x_run.ch2_sem2), ref2, dark2);
  out.ch1_y = normalize_series(series(y_run.ch1, y_run.ch1_sem2), ref1, dark1);
  out.ch2_y = normalize_series(series(y_run.ch2, y_run.ch2_sem2), ref2, dark2);
  out.cross_x = normalize_cross(x_run, shot_ref, d);
  out.cross_y = normalize_cross(y_run, shot_ref, d);
  return out;
}

SpectrumSet normalized_single_run(const RawSpectrum& run, const RawSpectrum& shot_ref,
                                  const RawSpectrum* dark, bool electronic_correction) {
  SpectrumSet full = normalized_spectra(run, run, shot_ref, dark, electronic_correction);
  full.combos[static_cast<int>(Combo::y_plus)] = CombinationSpectrum{};
  full.combos[static_cast<int>(Combo::y_minus)] = CombinationSpectrum{};
  full.ch1_y = CombinationSpectrum{};
  full.ch2_y = CombinationSpectrum{};
  full.cross_y.clear();
  return full;
}

SpectrumSet analytic_spectrum_set(const NopoModel& model, double sample_rate_hz, int fft_length) {
  if (sample_rate_hz <= 0.0 || fft_length < 8) {
    throw ValidationError("analytic spectra need a positive sample rate and fft_length >= 8");
  }
  const std::size_t bins = static_cast<std::size_t>(fft_length) / 2 + 1;
  SpectrumSet out;
  out.freq_hz.resize(bins);
  out.rbw_hz = sample_rate_hz / fft_length;
  out.n_averages = 0;
  out.electronic_corrected = true;  // model spectra carry no electronic noise
  for (auto& c : out.combos) {
    c.linear.resize(bins);
    c.sem.assign(bins, 0.0);
  }
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * sample_rate_hz / fft_length;
    out.freq_hz[k] = f;
    const auto v = predicted_measured(model, f);
    out.combos[static_cast<int>(Combo::x_minus)].linear[k] = v.x_minus;
    out.combos[static_cast<int>(Combo::x_plus)].linear[k] = v.x_plus;
    out.combos[static_cast<int>(Combo::y_minus)].linear[k] = v.y_minus;
    out.combos[static_cast<int>(Combo::y_plus)].linear[k] = v.y_plus;
  }
  // per-channel model spectra: Var(x_j) = (V_X+ + V_X-)/2
  out.ch1_x.linear.resize(bins);
  out.ch1_x.sem.assign(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    out.ch1_x.linear[k] = 0.5 * (out.combos[1].linear[k] + out.combos[0].linear[k]);
  }
  out.ch2_x = out.ch1_x;
  out.ch1_y = out.ch1_x;
  out.ch2_y = out.ch1_x;
  out.cross_x.resize(bins);
  out.cross_y.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    out.cross_x[k] = 0.5 * (out.combos[1].linear[k] - out.combos[0].linear[k]);
    out.cross_y[k] = -0.5 * (out.combos[1].linear[k] - out.combos[0].linear[k]);
  }
  return out;
}

EntanglementReport band_report(const SpectrumSet& spectra, double f_lo, double f_hi,
                               const EfficiencyChain& eff, const BandReportOptions& options) {
  if (!(f_lo < f_hi)) throw ValidationError("band limits must satisfy f_lo < f_hi");
  if (spectra.freq_hz.empty()) throw ValidationError("empty spectrum set");
  if (f_hi < spectra.freq_hz.front() || f_lo > spectra.freq_hz.back()) {
    throw ValidationError("band lies outside the spectrum grid");
  }
  for (int c = 0; c < 4; ++c) {
    if (spectra.combos[c].empty()) {
      throw ValidationError(std::string("missing spectrum for combination ") + kComboNames[c]);
    }
  }

  EntanglementReport rep;
  rep.band_lo_hz = f_lo;
  rep.band_hi_hz = f_hi;
  rep.n_averages = spectra.n_averages;
  rep.electronic_corrected = spectra.electronic_corrected;
  rep.eta_det = eff.det_mean();

  for (int c = 0; c < 4; ++c) {
    const auto avg =
        band_average(spectra.combos[c], spectra.freq_hz, f_lo, f_hi, options.mad_threshold);
    rep.measured[c] = {avg.mean, avg.sem};
    rep.bins_used[c] = avg.used;
    rep.bins_masked[c] = avg.masked;
  }
  rep.duan_measured = rep.measured[static_cast<int>(Combo::x_minus)].linear +
                      rep.measured[static_cast<int>(Combo::y_plus)].linear;

  // detector correction; a squeezed variance below 1 - eta_det has no
  // physical preimage and only flags the report
  rep.corrected_valid = true;
  for (int c = 0; c < 4; ++c) {
    const double v = rep.measured[c].linear;
    if (v <= 1.0 - rep.eta_det) {
      rep.corrected_valid = false;
      rep.corrected[c] = {0.0, 0.0};
      continue;
    }
    rep.corrected[c] = {invert_efficiency(v, rep.eta_det), rep.measured[c].sem / rep.eta_det};
  }
  if (!rep.corrected_valid) return rep;

  const std::array<double, 4> v = {rep.corrected[0].linear, rep.corrected[1].linear,
                                   rep.corrected[2].linear, rep.corrected[3].linear};
  const std::array<double, 4> sem = {rep.corrected[0].sem, rep.corrected[1].sem,
                                     rep.corrected[2].sem, rep.corrected[3].sem};
  auto state_of = [](const std::array<double, 4>& w) {
    return symmetric_state({w[0], w[1], w[2], w[3]});
  };

  const auto cm = state_of(v);
  rep.state_physicality = cm.physicality();
  const auto reid = reid_product(cm);
  rep.reid_e = reid.e;
  rep.reid_e2 = reid.e_squared;
  rep.gain_x = reid.gain_x;
  rep.gain_y = reid.gain_y;
  rep.duan = duan_sum(cm);
  rep.purity_value = purity(cm);
  rep.reid_entangled = rep.reid_e < 1.0;
  rep.duan_entangled = rep.duan < 2.0;

  rep.reid_e_sem =
      propagate_sem(v, sem, [&](const std::array<double, 4>& w) { return reid_product(state_of(w)).e; });
  rep.reid_e2_sem = propagate_sem(
      v, sem, [&](const std::array<double, 4>& w) { return reid_product(state_of(w)).e_squared; });
  rep.duan_sem =
      propagate_sem(v, sem, [&](const std::array<double, 4>& w) { return duan_sum(state_of(w)); });
  rep.purity_sem =
      propagate_sem(v, sem, [&](const std::array<double, 4>& w) { return purity(state_of(w)); });

  if (options.per_bin_gain && !spectra.cross_x.empty() && !spectra.cross_y.empty()) {
    // conditional variance per bin, corrected for the detector, band-averaged
    auto cond_band = [&](const CombinationSpectrum& s1, const CombinationSpectrum& s2,
                         const std::vector<double>& cross) {
      double acc = 0.0;
      int count = 0;
      for (std::size_t k = 0; k < spectra.freq_hz.size(); ++k) {
        if (spectra.freq_hz[k] < f_lo || spectra.freq_hz[k] > f_hi) continue;
        const double v1 = invert_efficiency(std::max(s1.linear[k], 1.0 - rep.eta_det + kFloor),
                                            rep.eta_det);
        const double v2 = invert_efficiency(std::max(s2.linear[k], 1.0 - rep.eta_det + kFloor),
                                            rep.eta_det);
        const double c12 = cross[k] / rep.eta_det;
        acc += v1 - c12 * c12 / v2;
        ++count;
      }
      return count > 0 ? acc / count : 0.0;
    };
    const double cx = cond_band(spectra.ch1_x, spectra.ch2_x, spectra.cross_x);
    const double cy = cond_band(spectra.ch1_y, spectra.ch2_y, spectra.cross_y);
    if (cx > 0.0 && cy > 0.0) rep.reid_e_per_bin = std::sqrt(cx * cy);
  }
  return rep;
}

}  // namespace epr

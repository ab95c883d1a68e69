#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "epr/dsp.hpp"
#include "epr/nopo.hpp"

namespace epr {

enum class Combo : int { x_minus = 0, x_plus = 1, y_minus = 2, y_plus = 3 };
inline constexpr std::array<const char*, 4> kComboNames = {"X-", "X+", "Y-", "Y+"};

// One shot-noise-normalized spectrum with its per-bin standard error.
struct CombinationSpectrum {
  std::vector<double> linear;
  std::vector<double> sem;
  bool empty() const { return linear.empty(); }
};

// Shot-noise-normalized spectra of the four joint combinations plus the raw
// per-channel spectra of the two runs they came from.
struct SpectrumSet {
  std::vector<double> freq_hz;
  double rbw_hz = 0.0;
  int n_averages = 0;
  bool electronic_corrected = false;

  std::array<CombinationSpectrum, 4> combos;  // indexed by Combo
  CombinationSpectrum ch1_x, ch2_x, ch1_y, ch2_y;
  std::vector<double> cross_x, cross_y;  // normalized Re cross-spectra

  const CombinationSpectrum& combo(Combo c) const { return combos[static_cast<int>(c)]; }
  bool has_y() const { return !combo(Combo::y_plus).empty(); }
};

// Normalize the two signal runs against the shot-noise reference, bin by bin.
// The x run supplies X± (its LO angles select the x quadratures), the y run
// supplies Y±. When a dark spectrum is given and correction is on, the
// electronic spectrum is subtracted from signal and reference alike before
// the division.
SpectrumSet normalized_spectra(const RawSpectrum& x_run, const RawSpectrum& y_run,
                               const RawSpectrum& shot_ref, const RawSpectrum* dark,
                               bool electronic_correction);

// Single-run variant: fills the X± combinations only.
SpectrumSet normalized_single_run(const RawSpectrum& run, const RawSpectrum& shot_ref,
                                  const RawSpectrum* dark, bool electronic_correction);

struct VarianceEstimate {
  double linear = 0.0;
  double sem = 0.0;
  double db() const;
  double sem_db() const;
};

struct BandReportOptions {
  double mad_threshold = 5.0;  // outlier mask, in raw MAD units; <= 0 disables
  bool per_bin_gain = false;
};

struct EntanglementReport {
  double band_lo_hz = 0.0;
  double band_hi_hz = 0.0;
  int n_averages = 0;
  bool electronic_corrected = false;

  std::array<VarianceEstimate, 4> measured;   // indexed by Combo
  std::array<VarianceEstimate, 4> corrected;  // detector efficiency removed
  std::array<int, 4> bins_used{};
  std::array<int, 4> bins_masked{};
  double eta_det = 1.0;
  bool corrected_valid = false;

  // criteria evaluated on the corrected (optical) state
  double reid_e = 0.0, reid_e_sem = 0.0;
  double reid_e2 = 0.0, reid_e2_sem = 0.0;
  double gain_x = 0.0, gain_y = 0.0;
  double duan = 0.0, duan_sem = 0.0;
  double purity_value = 0.0, purity_sem = 0.0;
  Physicality state_physicality = Physicality::physical;
  bool reid_entangled = false;
  bool duan_entangled = false;

  // duan sum of the uncorrected (measured) variances, for reference
  double duan_measured = 0.0;

  // per-bin gain-optimized alternative, when requested
  std::optional<double> reid_e_per_bin;
};

// Band-average the four combinations (linear mean over bins, MAD-masked),
// correct for the detector efficiency, reconstruct the symmetric state and
// evaluate the criteria with first-order uncertainty propagation.
EntanglementReport band_report(const SpectrumSet& spectra, double f_lo, double f_hi,
                               const EfficiencyChain& eff, const BandReportOptions& options = {});

// band_report on model predictions instead of measured spectra: analytic
// spectra are laid on the given grid and pushed through the same path.
SpectrumSet analytic_spectrum_set(const NopoModel& model, double sample_rate_hz, int fft_length);

}  // namespace epr

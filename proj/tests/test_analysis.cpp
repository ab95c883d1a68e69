#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epr/analysis.hpp"
#include "epr/errors.hpp"
#include "epr/random.hpp"
#include "epr/synth.hpp"
#include "epr/units.hpp"

using namespace epr;

namespace {

EfficiencyChain table_chain() {
  EfficiencyChain chain;
  chain.ch1 = {852.0, 0.983, 0.990, 0.984, 0.96};
  chain.ch2 = {1064.0, 0.987, 0.991, 0.989, 0.93};
  return chain;
}

SynthConfig reference_config(std::uint64_t seed, double duration = 0.4) {
  SynthConfig cfg;
  cfg.model.eff = table_chain();
  cfg.model.pump.sigma = 0.25;
  cfg.model.phase_noise = {0.0203, 1000.0};
  cfg.duration_s = duration;
  cfg.seed = seed;
  return cfg;
}

struct RunSpectra {
  RawSpectrum x, y, shot, dark;
};

RunSpectra spectra_for(const SynthConfig& base, int fft_length, int n_avg) {
  SynthConfig cfg = base;
  RunSpectra out;
  cfg.seed = mix_seed(base.seed, 0x11);
  out.x = welch_spectra(synthesize(cfg), fft_length, n_avg);
  cfg.seed = mix_seed(base.seed, 0x12);
  cfg.lo_angles = QuadratureAngles(kPi / 2, kPi / 2);
  out.y = welch_spectra(synthesize(cfg), fft_length, n_avg);
  cfg.seed = mix_seed(base.seed, 0x13);
  out.shot = welch_spectra(shot_noise_reference(cfg), fft_length, n_avg);
  cfg.seed = mix_seed(base.seed, 0x14);
  out.dark = welch_spectra(dark_trace(cfg), fft_length, n_avg);
  return out;
}

}  // namespace

TEST_CASE("self-normalization of a shot trace is flat at 0 dB") {
  SynthConfig cfg = reference_config(5, 0.32);
  cfg.electronic_noise_enabled = false;
  const auto ref = shot_noise_reference(cfg);
  const auto spec = welch_spectra(ref, 16000, 100);
  const auto set = normalized_single_run(spec, spec, nullptr, false);
  for (std::size_t k = 0; k < set.freq_hz.size(); ++k) {
    CHECK(set.combo(Combo::x_minus).linear[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(set.ch1_x.linear[k] == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_FALSE(set.has_y());
  // resolution bandwidth at the acquisition defaults
  CHECK(spec.rbw_hz() == doctest::Approx(312.5));
}

TEST_CASE("normalization against an independent shot reference") {
  SynthConfig cfg = reference_config(6, 0.32);
  cfg.electronic_noise_enabled = false;
  SynthConfig ref_cfg = cfg;
  ref_cfg.seed = 999;
  const auto run = welch_spectra(shot_noise_reference(cfg), 2000, 800);
  const auto ref = welch_spectra(shot_noise_reference(ref_cfg), 2000, 800);
  const auto set = normalized_single_run(run, ref, nullptr, false);
  // flat at 0 dB: per-bin scatter at 800 averages is ~5% in power, so 1 dB
  // is a five-sigma allowance
  int outliers = 0;
  double mean = 0.0;
  for (std::size_t k = 1; k + 1 < set.freq_hz.size(); ++k) {
    mean += set.combo(Combo::x_minus).linear[k];
    if (std::abs(to_db(set.combo(Combo::x_minus).linear[k])) > 1.0) ++outliers;
  }
  mean /= static_cast<double>(set.freq_hz.size() - 2);
  CHECK(outliers == 0);
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("normalization by a flat unit reference changes nothing") {
  SynthConfig cfg = reference_config(55, 0.05);
  cfg.electronic_noise_enabled = false;
  const auto run = welch_spectra(synthesize(cfg), 1000, 200);

  RawSpectrum unit = run;
  const std::size_t bins = unit.freq_hz.size();
  unit.ch1.assign(bins, 1.0);
  unit.ch2.assign(bins, 1.0);
  unit.sum.assign(bins, 1.0);
  unit.diff.assign(bins, 1.0);
  unit.ch1_sem2.assign(bins, 0.0);
  unit.ch2_sem2.assign(bins, 0.0);
  unit.sum_sem2.assign(bins, 0.0);
  unit.diff_sem2.assign(bins, 0.0);

  const auto set = normalized_spectra(run, run, unit, nullptr, false);
  for (std::size_t k = 0; k < bins; ++k) {
    CHECK(set.combo(Combo::x_minus).linear[k] == doctest::Approx(run.diff[k]).epsilon(1e-12));
    CHECK(set.combo(Combo::x_plus).linear[k] == doctest::Approx(run.sum[k]).epsilon(1e-12));
    CHECK(set.ch1_x.linear[k] == doctest::Approx(run.ch1[k]).epsilon(1e-12));
  }
}

TEST_CASE("electronic-noise correction: subtract then re-add recovers the raw spectrum") {
  SynthConfig cfg = reference_config(7, 0.1);
  cfg.electronic_noise_enabled = true;
  const auto spectra = spectra_for(cfg, 2000, 250);
  const auto corrected = normalized_spectra(spectra.x, spectra.y, spectra.shot, &spectra.dark, true);
  const auto raw = normalized_spectra(spectra.x, spectra.y, spectra.shot, nullptr, false);

  for (std::size_t k = 0; k < corrected.freq_hz.size(); ++k) {
    // u_corr = (s - d) / (r - d)  =>  u_corr * (r - d) + d == u_raw * r
    const double r = spectra.shot.diff[k];
    const double d = spectra.dark.diff[k];
    const double lhs = corrected.combo(Combo::x_minus).linear[k] * (r - d) + d;
    const double rhs = raw.combo(Combo::x_minus).linear[k] * r;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
  CHECK(corrected.electronic_corrected);
  CHECK_FALSE(raw.electronic_corrected);
}

TEST_CASE("band_report on the reference run") {
  SynthConfig cfg = reference_config(8, 0.4);
  const auto spectra = spectra_for(cfg, 16000, 125);
  const auto set = normalized_spectra(spectra.x, spectra.y, spectra.shot, &spectra.dark, true);
  const auto rep = band_report(set, 50.0e3, 300.0e3, table_chain());

  // measured level near -7.1 dB, corrected near -8.3 dB
  CHECK(rep.measured[static_cast<int>(Combo::x_minus)].db() == doctest::Approx(-7.1).epsilon(0.03));
  CHECK(rep.corrected_valid);
  CHECK(rep.corrected[static_cast<int>(Combo::x_minus)].db() == doctest::Approx(-8.3).epsilon(0.03));
  // correction deepens squeezing and inflates anti-squeezing in dB terms
  for (int c = 0; c < 4; ++c) {
    if (rep.measured[c].linear < 1.0) {
      CHECK(rep.corrected[c].db() < rep.measured[c].db());
    } else {
      CHECK(rep.corrected[c].db() > rep.measured[c].db());
    }
  }

  // the model is exchange symmetric, so both corrected squeezed variances sit
  // near 0.148 and the sum lands near 0.296
  CHECK(rep.duan == doctest::Approx(0.296).epsilon(0.05));
  CHECK(rep.duan_entangled);
  CHECK(rep.reid_e < 1.0);
  CHECK(rep.reid_entangled);
  CHECK(rep.purity_value > 0.3);
  CHECK(rep.purity_value < 1.1);
  CHECK(rep.gain_x > 0.0);
  CHECK(rep.gain_y < 0.0);
  // uncertainties present and small
  CHECK(rep.measured[0].sem > 0.0);
  CHECK(rep.measured[0].sem < 0.01);
  CHECK(rep.duan_sem > 0.0);
}

TEST_CASE("vacuum input: boundary values within statistics") {
  SynthConfig cfg = reference_config(9, 0.4);
  cfg.model.pump.sigma = 0.0;
  cfg.model.phase_noise.rms_rad = 0.0;
  const auto spectra = spectra_for(cfg, 4000, 500);
  const auto set = normalized_spectra(spectra.x, spectra.y, spectra.shot, &spectra.dark, true);
  const auto rep = band_report(set, 50.0e3, 300.0e3, table_chain());

  for (int c = 0; c < 4; ++c) {
    CHECK(std::abs(rep.measured[c].db()) < 0.05);
  }
  CHECK(rep.reid_e == doctest::Approx(1.0).epsilon(0.02));
  CHECK(rep.duan == doctest::Approx(2.0).epsilon(0.02));
  CHECK(rep.purity_value == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("MAD mask excludes narrow peaks from band averages") {
  SynthConfig clean_cfg = reference_config(10, 0.2);
  SynthConfig peaky_cfg = clean_cfg;
  peaky_cfg.peaks = {{120.0e3, 1.0}, {210.0e3, 0.7}};

  const auto clean = spectra_for(clean_cfg, 4000, 250);
  const auto peaky = spectra_for(peaky_cfg, 4000, 250);
  const auto clean_set = normalized_spectra(clean.x, clean.y, clean.shot, &clean.dark, true);
  const auto peaky_set = normalized_spectra(peaky.x, peaky.y, peaky.shot, &peaky.dark, true);

  BandReportOptions masked;
  masked.mad_threshold = 5.0;
  BandReportOptions unmasked;
  unmasked.mad_threshold = 0.0;

  const auto rep_clean = band_report(clean_set, 50.0e3, 300.0e3, table_chain(), masked);
  const auto rep_masked = band_report(peaky_set, 50.0e3, 300.0e3, table_chain(), masked);
  const auto rep_raw = band_report(peaky_set, 50.0e3, 300.0e3, table_chain(), unmasked);

  const int xm = static_cast<int>(Combo::x_minus);
  // unmasked: the tones contaminate the squeezed band average badly
  CHECK(rep_raw.measured[xm].linear > 1.5 * rep_clean.measured[xm].linear);
  // masked: agrees with the clean run
  CHECK(rep_masked.measured[xm].db() == doctest::Approx(rep_clean.measured[xm].db()).epsilon(0.02));
  CHECK(rep_masked.bins_masked[xm] > 0);
}

TEST_CASE("gain optimality transfer: reconstruction matches the direct spectral minimum") {
  SynthConfig cfg = reference_config(16, 0.2);
  const auto spectra = spectra_for(cfg, 2000, 500);
  const auto set = normalized_spectra(spectra.x, spectra.y, spectra.shot, &spectra.dark, true);

  EfficiencyChain unit;  // det = 1: corrected equals measured
  BandReportOptions opt;
  opt.mad_threshold = 0.0;
  const auto rep = band_report(set, 50.0e3, 300.0e3, unit, opt);

  // direct route: minimize the normalized spectral bilinear form over w
  auto direct_min = [&](const CombinationSpectrum& s1, const CombinationSpectrum& s2,
                        const std::vector<double>& cross) {
    double v1 = 0.0, v2 = 0.0, c = 0.0;
    int count = 0;
    for (std::size_t k = 0; k < set.freq_hz.size(); ++k) {
      if (set.freq_hz[k] < 50.0e3 || set.freq_hz[k] > 300.0e3) continue;
      v1 += s1.linear[k];
      v2 += s2.linear[k];
      c += cross[k];
      ++count;
    }
    v1 /= count;
    v2 /= count;
    c /= count;
    double best = 1e300;
    for (double w = -2.0; w <= 2.0; w += 1e-4) {
      best = std::min(best, v1 + w * w * v2 - 2.0 * w * c);
    }
    return best;
  };
  const double cvx = direct_min(set.ch1_x, set.ch2_x, set.cross_x);
  const double cvy = direct_min(set.ch1_y, set.ch2_y, set.cross_y);
  CHECK(rep.reid_e == doctest::Approx(std::sqrt(cvx * cvy)).epsilon(0.02));
}

TEST_CASE("per-bin gain mode tracks the band-gain Reid product") {
  SynthConfig cfg = reference_config(12, 0.2);
  const auto spectra = spectra_for(cfg, 2000, 500);
  const auto set = normalized_spectra(spectra.x, spectra.y, spectra.shot, &spectra.dark, true);
  BandReportOptions opt;
  opt.per_bin_gain = true;
  const auto rep = band_report(set, 50.0e3, 300.0e3, table_chain(), opt);
  REQUIRE(rep.reid_e_per_bin.has_value());
  // the spectrum is nearly flat across the band, so both routes agree closely
  CHECK(*rep.reid_e_per_bin == doctest::Approx(rep.reid_e).epsilon(0.05));
}

TEST_CASE("uncertainty scales as one over sqrt of the average count") {
  SynthConfig cfg = reference_config(13, 0.4);
  cfg.seed = 4242;
  const auto trace = synthesize(cfg);
  const int xm = static_cast<int>(Combo::x_minus);

  auto sem_at = [&](int n_avg) {
    const auto run = welch_spectra(trace, 1000, n_avg);
    SynthConfig ref_cfg = cfg;
    ref_cfg.seed = 515;
    const auto ref = welch_spectra(shot_noise_reference(ref_cfg), 1000, n_avg);
    const auto set = normalized_spectra(run, run, ref, nullptr, false);
    const auto rep = band_report(set, 50.0e3, 300.0e3, table_chain());
    return rep.measured[xm].sem;
  };

  const double s100 = sem_at(100);
  const double s400 = sem_at(400);
  const double s1600 = sem_at(1600);
  CHECK(s100 / s400 == doctest::Approx(2.0).epsilon(0.25));
  CHECK(s400 / s1600 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("band and input validation") {
  SynthConfig cfg = reference_config(14, 0.05);
  const auto spectra = spectra_for(cfg, 1000, 100);
  const auto set = normalized_spectra(spectra.x, spectra.y, spectra.shot, nullptr, false);

  CHECK_THROWS_AS(band_report(set, 300.0e3, 50.0e3, table_chain()), ValidationError);
  CHECK_THROWS_AS(band_report(set, 3.0e6, 4.0e6, table_chain()), ValidationError);

  // single-run set has no Y combinations
  const auto single = normalized_single_run(spectra.x, spectra.shot, nullptr, false);
  CHECK_THROWS_AS(band_report(single, 50.0e3, 300.0e3, table_chain()), ValidationError);

  // mismatched grids
  const auto other = welch_spectra(shot_noise_reference(cfg), 500, 100);
  CHECK_THROWS_AS(normalized_spectra(spectra.x, spectra.y, other, nullptr, false),
                  ValidationError);
}

TEST_CASE("unphysical detector correction is flagged, not fatal") {
  // squeeze the measured variance below 1 - eta_det so the correction has no
  // physical preimage
  SpectrumSet set;
  set.freq_hz = {100.0, 200.0, 300.0, 400.0, 500.0};
  set.n_averages = 10;
  for (auto& combo : set.combos) {
    combo.linear.assign(5, 1.2);
    combo.sem.assign(5, 0.0);
  }
  set.combos[static_cast<int>(Combo::x_minus)].linear.assign(5, 0.01);
  const auto rep = band_report(set, 100.0, 500.0, table_chain());
  CHECK_FALSE(rep.corrected_valid);
}

TEST_CASE("analytic spectrum set matches the model pointwise") {
  NopoModel model;
  model.eff = table_chain();
  model.pump.sigma = 0.25;
  model.phase_noise = {0.0203, 1000.0};
  const auto set = analytic_spectrum_set(model, 5.0e6, 16000);
  REQUIRE(set.freq_hz.size() == 8001);
  const auto rep = band_report(set, 50.0e3, 300.0e3, model.eff);
  CHECK(rep.measured[static_cast<int>(Combo::x_minus)].db() == doctest::Approx(-7.1).epsilon(0.01));
  CHECK(rep.corrected[static_cast<int>(Combo::x_minus)].db() == doctest::Approx(-8.3).epsilon(0.01));
  CHECK(rep.duan == doctest::Approx(0.2963).epsilon(0.01));
  CHECK(rep.measured[0].sem == 0.0);
}

TEST_CASE("low band with enlarged jitter degrades relative to the 50-300 kHz run") {
  // separate runs: larger jitter for the audio-band configuration
  SynthConfig high_cfg = reference_config(15, 0.4);
  SynthConfig low_cfg = high_cfg;
  low_cfg.model.phase_noise.rms_rad = 0.06;

  const auto high = spectra_for(high_cfg, 4000, 500);
  const auto low = spectra_for(low_cfg, 4000, 500);
  const auto high_set = normalized_spectra(high.x, high.y, high.shot, &high.dark, true);
  const auto low_set = normalized_spectra(low.x, low.y, low.shot, &low.dark, true);

  const auto rep_high = band_report(high_set, 50.0e3, 300.0e3, table_chain());
  const auto rep_low = band_report(low_set, 10.0e3, 50.0e3, table_chain());
  const int xm = static_cast<int>(Combo::x_minus);
  CHECK(rep_low.measured[xm].db() > rep_high.measured[xm].db() + 0.5);
  // both still entangled
  CHECK(rep_low.duan_entangled);
  CHECK(rep_high.duan_entangled);
}

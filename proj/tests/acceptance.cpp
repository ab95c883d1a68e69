// Acceptance suite: one pass/fail line per criterion, exit 0 only if all pass.
// Runs the full-scale pipeline (A8/A9) in a scratch directory under the
// current working directory.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epr/commands.hpp"
#include "epr/config.hpp"
#include "epr/trace_io.hpp"
#include "epr/units.hpp"
#include "test_support.hpp"

using namespace epr;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const std::string& id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%-4s %-52s %s  (%s)\n", id.c_str(), name.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

TwoModeVariances reference_corrected_variances() {
  return {from_db(-8.3), from_db(10.0), from_db(9.3), from_db(-7.1)};
}

void a1_purity() {
  const double mu = purity(symmetric_state(reference_corrected_variances()));
  const bool pass = std::abs(mu - 0.638) <= 0.02;
  report("A1", "purity of the reconstructed state", pass,
         "mu = " + fmt(mu) + ", target 0.638 +- 0.02");
}

void a2_duan() {
  const double v = duan_sum(symmetric_state(reference_corrected_variances()));
  const double boundary_db = 2.0 * from_db(-7.7);
  const bool pass = std::abs(v - 0.343) <= 0.01 && std::abs(boundary_db - 0.3396) <= 5e-4 &&
                    std::abs(v - boundary_db) <= 0.01;
  report("A2", "Duan-Simon sum of the reconstructed state", pass,
         "V_EPR = " + fmt(v) + ", target 0.343 +- 0.01; -7.7 dB check " + fmt(boundary_db));
}

void a3_detector_correction() {
  const double corrected_db = to_db(invert_efficiency(from_db(-7.1), 0.945));
  bool round_trip = true;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.06, 12.0);
  std::uniform_real_distribution<double> eta(0.3, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    const double e = eta(rng);
    const double back = invert_efficiency(e * (v - 1.0) + 1.0, e);
    worst = std::max(worst, std::abs(back - v));
    if (std::abs(back - v) > 1e-12) round_trip = false;
  }
  const bool pass = std::abs(corrected_db - (-8.3)) <= 0.05 && round_trip;
  report("A3", "detector correction and apply/invert round trip", pass,
         "-7.1 dB -> " + fmt(corrected_db) + " dB (target -8.3 +- 0.05), worst round trip " +
             fmt(worst));
}

void a4_efficiency_chain() {
  const double esc_1064 = escape_efficiency(0.12, 0.0015);
  const double esc_852 = escape_efficiency(0.12, 0.0021);
  const double esc_mean = std::sqrt(esc_1064 * esc_852);
  const double det_mean = std::sqrt(0.93 * 0.96);
  const bool pass = std::abs(esc_1064 - 0.987) <= 0.001 && std::abs(esc_852 - 0.983) <= 0.001 &&
                    std::abs(esc_mean - 0.985) <= 0.002 && std::abs(det_mean - 0.945) <= 0.0005;
  report("A4", "escape efficiencies and geometric means", pass,
         "esc = " + fmt(esc_1064) + "/" + fmt(esc_852) + ", means " + fmt(esc_mean) + "/" +
             fmt(det_mean));
}

void a5_cavity() {
  const double fsr = kSpeedOfLight / 0.390;
  const double finesse = 769.0e6 / 15.0e6;
  const bool pass =
      std::abs(fsr - 769.0e6) / 769.0e6 <= 0.01 && std::abs(finesse - 52.0) / 52.0 <= 0.05;
  report("A5", "cavity consistency: FSR and finesse", pass,
         "FSR = " + fmt(fsr / 1e6) + " MHz, FSR/bandwidth = " + fmt(finesse));
}

void a6_model_prediction() {
  const auto config = default_config();
  const double eta_opt = config.model.eff.optical_mean();
  bool pass = true;
  double lo_db = 100.0, hi_db = -100.0;
  for (double omega_tilde : {0.0, 0.01, 0.02}) {
    const auto v = spectrum_pm(0.25, omega_tilde, eta_opt);
    for (double dt = 0.0; dt <= 0.0301; dt += 0.002) {
      const double corrected_db = to_db(apply_phase_noise(v.x_minus, v.x_plus, dt));
      lo_db = std::min(lo_db, corrected_db);
      hi_db = std::max(hi_db, corrected_db);
      if (corrected_db < -9.0 || corrected_db > -7.8) pass = false;
    }
  }
  // the reference corrected squeezing implies a jitter inside the stated range
  const auto v0 = spectrum_pm(0.25, 0.0, eta_opt);
  const double inferred = infer_phase_noise(from_db(-8.3), v0.x_minus, v0.x_plus);
  if (!(inferred >= 0.0 && inferred <= 0.03)) pass = false;
  report("A6", "predicted corrected squeezing brackets -8.3 dB", pass,
         "range [" + fmt(lo_db) + ", " + fmt(hi_db) + "] dB, inferred jitter " + fmt(inferred) +
             " rad");
}

void a7_reid_machinery() {
  std::mt19937_64 rng(777);
  double worst_v = 0.0, worst_w = 0.0;
  bool pass = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cm = (trial % 2 == 0)
                        ? epr::testing::random_scan_safe_state(rng)
                        : symmetric_state(epr::testing::random_symmetric_variances(rng));
    for (auto pair : {std::pair{Quad::x1, Quad::x2}, std::pair{Quad::y1, Quad::y2}}) {
      const auto cf = conditional_variance(cm, pair.first, pair.second);
      const auto sc = epr::testing::scan_conditional_variance(cm, pair.first, pair.second);
      worst_v = std::max(worst_v, std::abs(cf.variance - sc.variance));
      worst_w = std::max(worst_w, std::abs(cf.gain - sc.gain));
      if (std::abs(cf.variance - sc.variance) > 1e-6) pass = false;
      if (std::abs(cf.gain - sc.gain) > 1.0001e-4) pass = false;
    }
  }
  // for the record: the reconstructed reference state sits near E^2 = 0.11
  const double e2 = reid_product(symmetric_state(reference_corrected_variances())).e_squared;
  report("A7", "closed-form gains match brute force (1000 states)", pass,
         "worst dV = " + fmt(worst_v) + ", worst dw = " + fmt(worst_w) +
             "; reference-state E^2 = " + fmt(e2));
}

struct PipelineRun {
  std::vector<EntanglementReport> analyzed;
  std::vector<EntanglementReport> predicted;
};

PipelineRun run_full_pipeline(const fs::path& work) {
  const auto config = default_config();  // 3.2 s at 5 MHz: 1000 FFTs of 16000
  const auto sim_dir = work / "sim";
  cmd_simulate(config, sim_dir);

  AnalyzeInputs inputs;
  inputs.x_trace = sim_dir / kSignalXFile;
  inputs.y_trace = sim_dir / kSignalYFile;
  inputs.shot_reference = sim_dir / kShotRefFile;
  inputs.dark = sim_dir / kDarkFile;

  PipelineRun run;
  run.analyzed = cmd_analyze(inputs, config, work / "analyzed", {});
  run.predicted = cmd_predict(config, work / "predicted", {});
  return run;
}

void a8_synthesis_fidelity(const PipelineRun& run) {
  bool pass = true;
  double worst = 0.0;
  std::string detail;
  for (int c = 0; c < 4; ++c) {
    const double measured = run.analyzed[0].measured[c].db();
    const double target = run.predicted[0].measured[c].db();
    const double delta = std::abs(measured - target);
    worst = std::max(worst, delta);
    if (delta > 0.2) pass = false;
    detail += std::string(kComboNames[c]) + " " + fmt(measured) + "/" + fmt(target) + " ";
  }
  report("A8", "synthesis fidelity: band variances within 0.2 dB", pass,
         detail + "worst " + fmt(worst) + " dB");
}

void a9_round_trip(const PipelineRun& run, const fs::path& work) {
  bool pass = true;
  double worst = 0.0;
  for (int c = 0; c < 4; ++c) {
    const double dm =
        std::abs(run.analyzed[0].measured[c].db() - run.predicted[0].measured[c].db());
    const double dc =
        std::abs(run.analyzed[0].corrected[c].db() - run.predicted[0].corrected[c].db());
    worst = std::max({worst, dm, dc});
    if (dm > 0.3 || dc > 0.3) pass = false;
  }
  const double dduan = std::abs(run.analyzed[0].duan - run.predicted[0].duan);
  if (dduan > 0.02) pass = false;

  // determinism of the command chain, byte for byte (short run)
  auto quick = default_config();
  quick.synth.duration_s = 0.02;
  cmd_simulate(quick, work / "det1");
  cmd_simulate(quick, work / "det2");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const bool deterministic =
      slurp(work / "det1" / kSignalXFile) == slurp(work / "det2" / kSignalXFile) &&
      slurp(work / "det1" / kShotRefFile) == slurp(work / "det2" / kShotRefFile);
  if (!deterministic) pass = false;

  report("A9", "simulate->analyze reproduces predict; deterministic", pass,
         "worst variance delta " + fmt(worst) + " dB, duan delta " + fmt(dduan) +
             (deterministic ? ", byte-identical reruns" : ", NON-DETERMINISTIC"));
}

void a10_property_suites() {
  bool pass = true;
  std::ostringstream detail;

  // physicality preservation under loss
  {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> eta(0.0, 1.0);
    bool ok = true;
    for (int i = 0; i < 200; ++i) {
      const auto st = symmetric_state(epr::testing::random_symmetric_variances(rng));
      const auto lossy = apply_per_mode_efficiency(st, eta(rng), eta(rng));
      if (lossy.symplectic_eigenvalues()[0] < 1.0 - 1e-9) ok = false;
    }
    detail << "loss-physicality " << (ok ? "ok" : "BAD");
    pass = pass && ok;
  }

  // purity rotation invariance
  {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    bool ok = true;
    for (int i = 0; i < 200; ++i) {
      const auto st = epr::testing::random_physical_state(rng);
      const double p0 = purity(st);
      const double p1 = purity(rotate_quadratures(st, {ang(rng), ang(rng)}));
      if (std::abs(p1 - p0) > 1e-10 * p0) ok = false;
    }
    detail << ", rotation-purity " << (ok ? "ok" : "BAD");
    pass = pass && ok;
  }

  // exchange symmetry and high-frequency limit of the model spectra
  {
    bool ok = true;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> us(0.0, 0.999), uw(0.0, 10.0), ue(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      const auto v = spectrum_pm(us(rng), uw(rng), ue(rng));
      if (v.x_minus != v.y_plus || v.x_plus != v.y_minus) ok = false;
    }
    const auto far = spectrum_pm(0.9, 1e5, 1.0);
    if (std::abs(far.x_minus - 1.0) > 1e-8 || std::abs(far.x_plus - 1.0) > 1e-8) ok = false;
    detail << ", exchange+limit " << (ok ? "ok" : "BAD");
    pass = pass && ok;
  }

  // Parseval consistency on white and model-shaped series
  {
    bool ok = true;
    auto parseval_gap = [](const QuadratureTraceSet& trace, int m) {
      const std::size_t segs = trace.ch1.size() / static_cast<std::size_t>(m);
      double power = 0.0;
      for (std::size_t i = 0; i < segs * static_cast<std::size_t>(m); ++i) {
        power += trace.ch1[i] * trace.ch1[i];
      }
      power /= static_cast<double>(segs * m);
      const auto spec = welch_spectra(trace, m, static_cast<int>(segs));
      double total = spec.ch1.front() + spec.ch1.back();
      for (std::size_t k = 1; k + 1 < spec.ch1.size(); ++k) total += 2.0 * spec.ch1[k];
      total /= m;
      return std::abs(total - power) / power;
    };
    SynthConfig cfg;
    cfg.model = default_config().model;
    cfg.duration_s = 0.02;
    cfg.seed = 22;
    cfg.electronic_noise_enabled = false;
    cfg.lo_noise.enabled = false;
    if (parseval_gap(shot_noise_reference(cfg), 2000) > 0.01) ok = false;
    if (parseval_gap(synthesize(cfg), 2000) > 0.01) ok = false;
    detail << ", parseval " << (ok ? "ok" : "BAD");
    pass = pass && ok;
  }

  // 1/sqrt(n) scaling of the reported uncertainties
  {
    SynthConfig cfg;
    cfg.model = default_config().model;
    cfg.duration_s = 0.4;
    cfg.seed = 23;
    const auto trace = synthesize(cfg);
    SynthConfig ref_cfg = cfg;
    ref_cfg.seed = 24;
    const auto ref_trace = shot_noise_reference(ref_cfg);
    auto sem_at = [&](int n) {
      const auto run = welch_spectra(trace, 1000, n);
      const auto ref = welch_spectra(ref_trace, 1000, n);
      const auto set = normalized_spectra(run, run, ref, nullptr, false);
      const auto rep =
          band_report(set, 50.0e3, 300.0e3, default_config().model.eff);
      return rep.measured[static_cast<int>(Combo::x_minus)].sem;
    };
    const double s100 = sem_at(100), s400 = sem_at(400), s1600 = sem_at(1600);
    const bool ok = std::abs(s100 / s400 - 2.0) < 0.5 && std::abs(s400 / s1600 - 2.0) < 0.5;
    detail << ", sem-scaling " << (ok ? "ok" : "BAD") << " (" << fmt(s100 / s400) << ", "
           << fmt(s400 / s1600) << ")";
    pass = pass && ok;
  }

  report("A10", "property suites", pass, detail.str());
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  a1_purity();
  a2_duan();
  a3_detector_correction();
  a4_efficiency_chain();
  a5_cavity();
  a6_model_prediction();
  a7_reid_machinery();

  const fs::path work = fs::current_path() / "eprsim_acceptance_work";
  fs::remove_all(work);
  fs::create_directories(work);
  try {
    const auto run = run_full_pipeline(work);
    a8_synthesis_fidelity(run);
    a9_round_trip(run, work);
  } catch (const std::exception& e) {
    report("A8", "synthesis fidelity", false, std::string("pipeline failed: ") + e.what());
    report("A9", "round trip", false, "pipeline failed");
  }
  a10_property_suites();

  if (g_failures == 0) {
    fs::remove_all(work);  // keep the gigabyte of traces only on failure
    std::printf("\nACCEPTANCE: all criteria PASS\n");
    return 0;
  }
  std::printf("\nACCEPTANCE: %d criterion(s) FAILED (artifacts kept in %s)\n", g_failures,
              work.string().c_str());
  return 1;
}

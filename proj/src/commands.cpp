#include "epr/commands.hpp"

#include <fstream>
#include <iostream>
#include <ostream>

#include "epr/errors.hpp"
#include "epr/random.hpp"
#include "epr/report_io.hpp"
#include "epr/trace_io.hpp"
#include "epr/units.hpp"

namespace epr {

namespace {

// run-level substream tags for the four traces of one simulation
enum RunStream : std::uint64_t {
  kRunSignalX = 0x1001,
  kRunSignalY = 0x1002,
  kRunShotRef = 0x1003,
  kRunDark = 0x1004,
};

void ensure_out_dir(const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create output directory " + out_dir.string());
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::vector<Band> effective_bands(const ExperimentConfig& config, const std::vector<Band>& bands) {
  if (!bands.empty()) return bands;
  return {{config.analysis.band_lo_hz, config.analysis.band_hi_hz}};
}

void warn_large_phase_noise(const ExperimentConfig& config) {
  if (!config.model.phase_noise.small_angle()) {
    std::cerr << "warning: phase_noise.rms_rad = " << config.model.phase_noise.rms_rad
              << " exceeds 0.3 rad; the small-angle regime assumed elsewhere does not hold\n";
  }
}

void write_config_snapshot(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  auto out = open_out(out_dir / kRunConfigFile);
  out << serialize_config(config);
}

void write_reports(const std::vector<EntanglementReport>& reports, const ExperimentConfig& config,
                   const std::filesystem::path& out_dir, const char* text_name,
                   const char* csv_name, bool write_csv, bool write_text) {
  if (write_text) {
    auto out = open_out(out_dir / text_name);
    for (const auto& rep : reports) {
      write_report_text(out, rep, config.labels.ch1, config.labels.ch2);
      out << "\n";
    }
  }
  if (write_csv) {
    auto out = open_out(out_dir / csv_name);
    write_report_csv(out, reports);
  }
}

BandReportOptions report_options(const ExperimentConfig& config) {
  BandReportOptions opt;
  opt.mad_threshold = config.analysis.mad_threshold;
  opt.per_bin_gain = config.analysis.per_bin_gain;
  return opt;
}

}  // namespace

std::vector<EntanglementReport> cmd_predict(const ExperimentConfig& config,
                                            const std::filesystem::path& out_dir,
                                            const std::vector<Band>& bands, bool write_csv,
                                            bool write_text) {
  validate_config(config);
  warn_large_phase_noise(config);
  ensure_out_dir(out_dir);
  write_config_snapshot(config, out_dir);

  const auto spectra =
      analytic_spectrum_set(config.model, config.synth.sample_rate_hz, config.analysis.fft_length);
  if (write_csv) {
    auto out = open_out(out_dir / "predicted_spectra.csv");
    write_spectra_csv(out, spectra);
  }

  std::vector<EntanglementReport> reports;
  for (const auto& band : effective_bands(config, bands)) {
    reports.push_back(band_report(spectra, band.lo_hz, band.hi_hz, config.model.eff,
                                  report_options(config)));
  }
  write_reports(reports, config, out_dir, "predicted_report.txt", "predicted_report.csv",
                write_csv, write_text);
  return reports;
}

void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  validate_config(config);
  warn_large_phase_noise(config);
  ensure_out_dir(out_dir);

  write_config_snapshot(config, out_dir);

  auto with_run = [&](std::uint64_t tag, QuadratureAngles angles) {
    SynthConfig sc = config.synth;
    sc.seed = mix_seed(config.synth.seed, tag);
    sc.lo_angles = angles;
    sc.metadata_extra = "master_seed = " + std::to_string(config.synth.seed) + "\n";
    return sc;
  };

  const auto x_angles = config.synth.lo_angles;
  const QuadratureAngles y_angles(config.synth.lo_angles.theta1 + kPi / 2,
                                  config.synth.lo_angles.theta2 + kPi / 2);

  write_trace(out_dir / kSignalXFile, synthesize(with_run(kRunSignalX, x_angles)));
  write_trace(out_dir / kSignalYFile, synthesize(with_run(kRunSignalY, y_angles)));
  write_trace(out_dir / kShotRefFile, shot_noise_reference(with_run(kRunShotRef, x_angles)));
  write_trace(out_dir / kDarkFile, dark_trace(with_run(kRunDark, x_angles)));
}

std::vector<EntanglementReport> cmd_analyze(const AnalyzeInputs& inputs,
                                            const ExperimentConfig& config,
                                            const std::filesystem::path& out_dir,
                                            const std::vector<Band>& bands, bool write_csv,
                                            bool write_text) {
  validate_config(config);
  ensure_out_dir(out_dir);
  write_config_snapshot(config, out_dir);
  const int m = config.analysis.fft_length;
  const int n_avg = config.analysis.n_averages;
  const auto window = config.analysis.window;

  if (!std::filesystem::exists(inputs.shot_reference)) {
    throw ValidationError("shot-noise calibration trace missing: " +
                          inputs.shot_reference.string());
  }

  // one trace in memory at a time
  RawSpectrum shot = welch_spectra(read_trace(inputs.shot_reference), m, n_avg, window);
  RawSpectrum dark;
  const bool have_dark = inputs.dark.has_value();
  if (have_dark) dark = welch_spectra(read_trace(*inputs.dark), m, n_avg, window);
  if (config.analysis.electronic_correction && !have_dark) {
    throw ValidationError(
        "electronic-noise correction requested but no dark trace given (pass one or disable "
        "analysis.electronic_correction)");
  }

  double fs_x = 0.0;
  RawSpectrum x_run, y_run;
  {
    const auto trace = read_trace(inputs.x_trace);
    fs_x = trace.sample_rate_hz;
    x_run = welch_spectra(trace, m, n_avg, window);
  }
  {
    const auto trace = read_trace(inputs.y_trace);
    if (trace.sample_rate_hz != fs_x) {
      throw ValidationError("x and y traces have different sample rates");
    }
    y_run = welch_spectra(trace, m, n_avg, window);
  }

  const auto spectra = normalized_spectra(x_run, y_run, shot, have_dark ? &dark : nullptr,
                                          config.analysis.electronic_correction);
  if (write_csv) {
    auto out = open_out(out_dir / "spectra.csv");
    write_spectra_csv(out, spectra);
  }

  std::vector<EntanglementReport> reports;
  for (const auto& band : effective_bands(config, bands)) {
    reports.push_back(
        band_report(spectra, band.lo_hz, band.hi_hz, config.model.eff, report_options(config)));
  }
  write_reports(reports, config, out_dir, "report.txt", "report.csv", write_csv, write_text);

  for (const auto& rep : reports) {
    if (!rep.corrected_valid) {
      throw ValidationError("criteria verdicts not computable: detector correction unphysical in "
                            "at least one band");
    }
  }
  return reports;
}

bool cmd_check(const ExperimentConfig& config, std::ostream& os) {
  validate_config(config);
  auto cavity = cavity_consistency(config.model.cavity);
  auto eff = efficiency_consistency(config.model.cavity, config.model.eff);
  os << "cavity consistency:\n";
  write_consistency_text(os, cavity);
  os << "\nefficiency chain:\n";
  write_consistency_text(os, eff);
  const bool ok = cavity.all_pass() && eff.all_pass();
  os << "\noverall: " << (ok ? "PASS" : "FAIL") << "\n";
  return ok;
}

}  // namespace epr

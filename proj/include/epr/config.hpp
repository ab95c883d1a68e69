#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "epr/analysis.hpp"
#include "epr/synth.hpp"

namespace epr {

struct AnalysisParams {
  double demod_freq_hz = 200.0e3;
  double lpf_cutoff_hz = 10.0e3;
  int fft_length = 16000;
  int n_averages = 1000;
  WelchWindow window = WelchWindow::rectangular;
  double band_lo_hz = 50.0e3;
  double band_hi_hz = 300.0e3;
  bool electronic_correction = true;
  double mad_threshold = 5.0;
  bool per_bin_gain = false;
};

struct ReportLabels {
  std::string ch1 = "852nm";
  std::string ch2 = "1064nm";
};

// Everything a reproducible run needs: model, synthesis and analysis
// parameters, labels. Flat "key = value" text format with dotted section
// prefixes and '#' comments.
struct ExperimentConfig {
  NopoModel model;
  SynthConfig synth;  // synth.model mirrors model after validation
  AnalysisParams analysis;
  ReportLabels labels;
};

// Built-in defaults: the design-table parameter regime.
ExperimentConfig default_config();

// Parse / load with field-level validation errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Serialize the full validated record; parse(serialize(c)) round-trips.
std::string serialize_config(const ExperimentConfig& config);

// Range checks against the module preconditions; throws ValidationError with
// the offending field named.
void validate_config(const ExperimentConfig& config);

}  // namespace epr

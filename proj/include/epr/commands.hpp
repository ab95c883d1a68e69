#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "epr/config.hpp"

namespace epr {

struct Band {
  double lo_hz;
  double hi_hz;
};

// Analytic end-to-end prediction: model spectra over the analysis grid plus
// the predicted band reports. No randomness. Writes predicted_spectra.csv,
// predicted_report.txt, predicted_report.csv.
std::vector<EntanglementReport> cmd_predict(const ExperimentConfig& config,
                                            const std::filesystem::path& out_dir,
                                            const std::vector<Band>& bands, bool write_csv = true,
                                            bool write_text = true);

// File names produced by cmd_simulate.
inline constexpr const char* kSignalXFile = "signal_x.eprt";
inline constexpr const char* kSignalYFile = "signal_y.eprt";
inline constexpr const char* kShotRefFile = "shot_reference.eprt";
inline constexpr const char* kDarkFile = "dark.eprt";
inline constexpr const char* kRunConfigFile = "run_config.cfg";

// Synthesize the four traces of a run: the x-quadrature run, the y-quadrature
// run (LO angles advanced by pi/2), the shot-noise reference and the dark
// record. Deterministic per seed; the full config is embedded in each trace.
void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct AnalyzeInputs {
  std::filesystem::path x_trace;
  std::filesystem::path y_trace;
  std::filesystem::path shot_reference;
  std::optional<std::filesystem::path> dark;
};

// Full measurement chain: load, Welch, normalize, correct, report per band.
// Writes spectra.csv, report.txt, report.csv into out_dir.
std::vector<EntanglementReport> cmd_analyze(const AnalyzeInputs& inputs,
                                            const ExperimentConfig& config,
                                            const std::filesystem::path& out_dir,
                                            const std::vector<Band>& bands, bool write_csv = true,
                                            bool write_text = true);

// Cavity and efficiency-chain consistency report; returns all_pass.
bool cmd_check(const ExperimentConfig& config, std::ostream& os);

}  // namespace epr

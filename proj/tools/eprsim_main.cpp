// eprsim: two-colour EPR entanglement simulator and analysis toolkit.
//
// Subcommands: predict | simulate | analyze | check.
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 format error.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "epr/commands.hpp"
#include "epr/errors.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> band_specs;
  bool csv_only = false;
  bool text_only = false;
};

epr::ExperimentConfig load(const CommonArgs& args) {
  if (args.config_path.empty()) return epr::default_config();
  return epr::load_config(args.config_path);
}

std::vector<epr::Band> parse_bands(const std::vector<std::string>& specs) {
  std::vector<epr::Band> bands;
  for (const auto& spec : specs) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
      throw epr::ValidationError("--band expects LO:HI in Hz, got '" + spec + "'");
    }
    try {
      bands.push_back({std::stod(spec.substr(0, colon)), std::stod(spec.substr(colon + 1))});
    } catch (const std::exception&) {
      throw epr::ValidationError("cannot parse --band '" + spec + "'");
    }
  }
  return bands;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_bands = true) {
  cmd->add_option("--config", args.config_path, "configuration file (key = value)");
  cmd->add_option("--out", args.out_dir, "output directory");
  if (with_bands) {
    cmd->add_option("--band", args.band_specs, "analysis band LO:HI in Hz (repeatable)");
  }
  cmd->add_flag("--csv", args.csv_only, "write only CSV outputs");
  cmd->add_flag("--text", args.text_only, "write only text outputs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "eprsim: below-threshold NOPO two-colour EPR entanglement simulator.\n"
      "All dB figures are 10*log10 of a variance relative to shot noise\n"
      "(vacuum = 0 dB); entanglement thresholds are 1 (Reid product) and 2\n"
      "(Duan-Simon sum)."};
  app.require_subcommand(1);

  CommonArgs predict_args, simulate_args, analyze_args, check_args;
  std::int64_t seed_override = -1;
  std::string x_trace, y_trace, shot_trace, dark_path;

  auto* predict = app.add_subcommand("predict", "analytic spectra and entanglement report");
  add_common(predict, predict_args);

  auto* simulate = app.add_subcommand("simulate", "synthesize signal, reference and dark traces");
  simulate->add_option("--config", simulate_args.config_path, "configuration file");
  simulate->add_option("--out", simulate_args.out_dir, "output directory");
  simulate->add_option("--seed", seed_override, "override the configured seed");

  auto* analyze = app.add_subcommand("analyze", "measurement chain on recorded traces");
  analyze->add_option("x_trace", x_trace, "trace measured at the x LO angles")->required();
  analyze->add_option("y_trace", y_trace, "trace measured at the y LO angles")->required();
  analyze->add_option("--shot", shot_trace, "shot-noise calibration trace")->required();
  analyze->add_option("--dark", dark_path, "electronic dark trace (enables per-bin correction)");
  add_common(analyze, analyze_args);

  auto* check = app.add_subcommand("check", "cavity and efficiency-chain consistency report");
  check->add_option("--config", check_args.config_path, "configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (predict->parsed()) {
      const auto config = load(predict_args);
      cmd_predict(config, predict_args.out_dir, parse_bands(predict_args.band_specs),
                  !predict_args.text_only, !predict_args.csv_only);
      std::cout << "wrote prediction to " << predict_args.out_dir << "\n";
    } else if (simulate->parsed()) {
      auto config = load(simulate_args);
      if (seed_override >= 0) {
        config.synth.seed = static_cast<std::uint64_t>(seed_override);
      }
      cmd_simulate(config, simulate_args.out_dir);
      std::cout << "wrote traces to " << simulate_args.out_dir << "\n";
    } else if (analyze->parsed()) {
      const auto config = load(analyze_args);
      epr::AnalyzeInputs inputs;
      inputs.x_trace = x_trace;
      inputs.y_trace = y_trace;
      inputs.shot_reference = shot_trace;
      if (!dark_path.empty()) inputs.dark = dark_path;
      const auto reports = cmd_analyze(inputs, config, analyze_args.out_dir,
                                       parse_bands(analyze_args.band_specs),
                                       !analyze_args.text_only, !analyze_args.csv_only);
      for (const auto& rep : reports) {
        std::cout << "band " << rep.band_lo_hz << ":" << rep.band_hi_hz
                  << " Hz: reid E = " << rep.reid_e << " (entangled: "
                  << (rep.reid_entangled ? "yes" : "no") << "), duan = " << rep.duan
                  << " (entangled: " << (rep.duan_entangled ? "yes" : "no") << ")\n";
      }
    } else if (check->parsed()) {
      const auto config = load(check_args);
      epr::cmd_check(config, std::cout);
    }
  } catch (const epr::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 4;
  } catch (const epr::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const epr::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

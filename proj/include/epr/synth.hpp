#pragma once

#include <cstdint>
#include <vector>

#include "epr/nopo.hpp"
#include "epr/trace.hpp"

namespace epr {

// Local-oscillator classical intensity noise reaching the balanced detector.
// The template is the LO noise PSD relative to shot noise; what leaks into the
// photocurrent is the template attenuated by the CMRR. 1/f below the corner,
// flat above, capped below clamp_hz.
struct LoClassicalNoise {
  bool enabled = true;
  double flat_db = 10.0;
  double corner_hz = 100.0e3;
  double clamp_hz = 100.0;
};

// Narrow laser phase-noise line added to both photocurrents.
// Amplitude is in sqrt(shot-noise) units; tone power is amplitude^2/2.
struct SpectralPeak {
  double freq_hz;
  double amplitude;
};

struct SynthConfig {
  NopoModel model;
  double sample_rate_hz = 5.0e6;
  double duration_s = 1.0;
  QuadratureAngles lo_angles{};
  std::uint64_t seed = 0;
  bool electronic_noise_enabled = true;
  double electronic_noise_db = -18.5;  // relative to shot noise
  double cmrr_db = 40.0;
  LoClassicalNoise lo_noise{};
  std::vector<SpectralPeak> peaks{};
  std::string metadata_extra{};  // appended to the trace metadata
};

struct SynthDiagnostics {
  double realized_jitter_rms = 0.0;
};

// Deterministic synthesis of a two-channel homodyne record realizing the
// model's quadrature spectra. Frequency-domain (circulant) synthesis of the
// four independent combinations, recombination into per-mode quadratures,
// rotation by the slow phase-jitter process and the LO angles, then additive
// electronic noise and CMRR-attenuated LO classical noise.
QuadratureTraceSet synthesize(const SynthConfig& config, SynthDiagnostics* diag = nullptr);

// Calibration trace with the NOPO output blocked: vacuum plus electronic
// noise, same seed discipline as synthesize.
QuadratureTraceSet shot_noise_reference(const SynthConfig& config);

// Detector dark record: electronic noise only.
QuadratureTraceSet dark_trace(const SynthConfig& config);

}  // namespace epr

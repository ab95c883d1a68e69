#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epr/gaussian.hpp"

namespace epr {

// Two-channel sampled homodyne photocurrent record in shot-noise-normalized
// units, with the calibration and provenance metadata needed to analyze it.
struct QuadratureTraceSet {
  std::vector<double> ch1;
  std::vector<double> ch2;
  double sample_rate_hz = 0.0;
  QuadratureAngles lo_angles{};
  double cal_var1 = 1.0;  // shot-noise reference variance per channel
  double cal_var2 = 1.0;
  std::string metadata;  // key = value text: seed, model snapshot, role

  std::uint64_t sample_count() const { return ch1.size(); }
  double duration_s() const {
    return sample_rate_hz > 0.0 ? static_cast<double>(ch1.size()) / sample_rate_hz : 0.0;
  }
};

}  // namespace epr

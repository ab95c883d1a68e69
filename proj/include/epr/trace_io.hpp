#pragma once

#include <filesystem>

#include "epr/trace.hpp"

namespace epr {

// Binary trace format, little-endian throughout:
//   magic "EPRT", u16 version (= 1), u16 channel count,
//   f64 sample rate (Hz), u64 per-channel sample count,
//   f64 lo angle 1, f64 lo angle 2, f64 calibration variance 1, f64 variance 2,
//   u32 metadata length + UTF-8 metadata text,
//   interleaved channel samples as f64.
inline constexpr std::uint16_t kTraceFormatVersion = 1;

void write_trace(const std::filesystem::path& path, const QuadratureTraceSet& trace);
QuadratureTraceSet read_trace(const std::filesystem::path& path);

}  // namespace epr

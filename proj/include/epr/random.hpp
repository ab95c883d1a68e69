#pragma once

#include <cstdint>
#include <random>

namespace epr {

// splitmix64 mixing; derives independent substream seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic standard-normal stream. Uniforms are taken from the raw
// mt19937_64 output so the sequence is identical on every platform.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // in [0, 1)
  double normal();   // standard normal, Box-Muller

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace epr

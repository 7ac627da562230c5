#pragma once

#include <cstdint>
#include <random>

namespace pdmr {

/// Gaussian noise stream keyed by (seed, stream). Each stream is an
/// independent generator, so results do not depend on the order in which
/// streams are evaluated.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, std::uint64_t stream);

  double normal(double sigma);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace pdmr

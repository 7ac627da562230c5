#include "pdmr/noise.hpp"

namespace pdmr {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed, std::uint64_t stream)
    : engine_(make_engine(seed, stream)) {}

double NoiseSource::normal(double sigma) {
  if (sigma == 0.0) return 0.0;
  return sigma * dist_(engine_);
}

}  // namespace pdmr

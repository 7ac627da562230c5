#include "pdmr/spin_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pdmr {

ZfsParams::ZfsParams(double d_mhz, double e_mhz) : d_(d_mhz), e_(e_mhz) {
  if (!(d_mhz > 0.0) || !std::isfinite(d_mhz)) {
    throw std::invalid_argument("ZfsParams: D must be positive and finite, got " +
                                std::to_string(d_mhz));
  }
  if (!(e_mhz >= 0.0) || !(e_mhz < d_mhz)) {
    throw std::invalid_argument("ZfsParams: E must satisfy 0 <= E < D, got E=" +
                                std::to_string(e_mhz));
  }
}

const char* to_string(Transition t) {
  return t == Transition::Plus ? "plus" : "minus";
}

namespace spin {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

SpinMatrix sx() {
  SpinMatrix m = SpinMatrix::Zero();
  m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = kInvSqrt2;
  return m;
}

SpinMatrix sy() {
  const Complex i(0.0, 1.0);
  SpinMatrix m = SpinMatrix::Zero();
  m(0, 1) = -i * kInvSqrt2;
  m(1, 0) = i * kInvSqrt2;
  m(1, 2) = -i * kInvSqrt2;
  m(2, 1) = i * kInvSqrt2;
  return m;
}

SpinMatrix sz() {
  SpinMatrix m = SpinMatrix::Zero();
  m(0, 0) = 1.0;
  m(2, 2) = -1.0;
  return m;
}

SpinMatrix identity() { return SpinMatrix::Identity(); }

}  // namespace spin

ZeroFieldBasis zero_field_basis() {
  const double r = 1.0 / std::sqrt(2.0);
  ZeroFieldBasis b;
  b.zero = SpinVector(0.0, 1.0, 0.0);
  b.plus = SpinVector(r, 0.0, r);
  b.minus = SpinVector(r, 0.0, -r);
  return b;
}

SpinMatrix build_hamiltonian(const ZfsParams& zfs) {
  // Assembled entrywise so the result is exactly Hermitian and traceless.
  const double d = zfs.d_mhz();
  const double e = zfs.e_mhz();
  SpinMatrix h = SpinMatrix::Zero();
  h(0, 0) = d / 3.0;
  h(1, 1) = -2.0 * d / 3.0;
  h(2, 2) = d / 3.0;
  h(0, 2) = e;
  h(2, 0) = e;
  return h;
}

Eigen::Vector3d analytic_energies(const ZfsParams& zfs) {
  const double d = zfs.d_mhz();
  const double e = zfs.e_mhz();
  return {-2.0 * d / 3.0, d / 3.0 - e, d / 3.0 + e};
}

TransitionPair transition_frequencies(const ZfsParams& zfs) {
  return {zfs.d_mhz() - zfs.e_mhz(), zfs.d_mhz() + zfs.e_mhz()};
}

double transition_frequency(const ZfsParams& zfs, Transition t) {
  const auto pair = transition_frequencies(zfs);
  return t == Transition::Plus ? pair.f_plus : pair.f_minus;
}

ZfsParams zfs_from_transitions(double f_lo, double f_hi) {
  if (!(f_lo > 0.0)) {
    throw std::invalid_argument("zfs_from_transitions: f_lo must be positive");
  }
  if (f_lo > f_hi) {
    throw std::invalid_argument("zfs_from_transitions: f_lo > f_hi (inputs must be ordered)");
  }
  return ZfsParams((f_hi + f_lo) / 2.0, (f_hi - f_lo) / 2.0);
}

}  // namespace pdmr

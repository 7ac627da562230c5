#include "pdmr/charge_model.hpp"

#include <cmath>
#include <string>

namespace pdmr {

namespace {

using Matrix6 = Eigen::Matrix<double, kLevelCount, kLevelCount>;
using Vector6 = Eigen::Matrix<double, kLevelCount, 1>;

void add_rate(Matrix6& m, int from, int to, double k) {
  m(to, from) += k;
  m(from, from) -= k;
}

}  // namespace

PhotoCycleRates PhotoCycleRates::at_power(const Photophysics& p, double laser_power) {
  if (!(laser_power >= 0.0)) throw std::invalid_argument("laser power must be >= 0");
  PhotoCycleRates r;
  r.k_pump = p.pump_per_power * laser_power;
  r.k_rad = p.k_rad;
  r.k_isc0 = p.k_isc0;
  r.k_isc1 = p.k_isc1;
  r.k_singlet = p.k_singlet;
  r.singlet_to_ms0 = p.singlet_to_ms0;
  r.k_ion = p.ion_per_power * laser_power;
  r.k_rec = p.recovery_per_power * laser_power;
  r.sigma_ion = p.sigma_ion;
  return r;
}

void PhotoCycleRates::validate() const {
  for (double k : {k_pump, k_rad, k_isc0, k_isc1, k_singlet, k_ion, k_rec, sigma_ion}) {
    if (!(k >= 0.0)) throw std::invalid_argument("PhotoCycleRates: rates must be >= 0");
  }
  if (!(k_isc1 > k_isc0)) throw std::invalid_argument("PhotoCycleRates: need k_isc1 > k_isc0");
  if (!(singlet_to_ms0 >= 0.0 && singlet_to_ms0 <= 1.0)) {
    throw std::invalid_argument("PhotoCycleRates: singlet_to_ms0 outside [0, 1]");
  }
}

Matrix6 rate_matrix(const PhotoCycleRates& r, SpinMode mode) {
  Matrix6 m = Matrix6::Zero();
  const double ion = r.effective_ionization();
  add_rate(m, GS0, ES0, r.k_pump);
  add_rate(m, GS1, ES1, r.k_pump);
  add_rate(m, ES0, GS0, r.k_rad);
  add_rate(m, ES1, GS1, r.k_rad);
  add_rate(m, ES0, Singlet, r.k_isc0);
  add_rate(m, ES1, Singlet, r.k_isc1);
  add_rate(m, ES0, Ionized, ion);
  add_rate(m, ES1, Ionized, ion);
  switch (mode) {
    case SpinMode::Free:
      add_rate(m, Singlet, GS0, r.k_singlet * r.singlet_to_ms0);
      add_rate(m, Singlet, GS1, r.k_singlet * (1.0 - r.singlet_to_ms0));
      // Spin-blind recovery: ms = 0 gets one of the three sublevels.
      add_rate(m, Ionized, GS0, r.k_rec / 3.0);
      add_rate(m, Ionized, GS1, r.k_rec * 2.0 / 3.0);
      break;
    case SpinMode::Ms0:
      add_rate(m, Singlet, GS0, r.k_singlet);
      add_rate(m, Ionized, GS0, r.k_rec);
      break;
    case SpinMode::Ms1:
      add_rate(m, Singlet, GS1, r.k_singlet);
      add_rate(m, Ionized, GS1, r.k_rec);
      break;
  }
  return m;
}

SteadyState solve_steady_state(const PhotoCycleRates& rates, SpinMode mode) {
  rates.validate();
  if (rates.k_pump == 0.0) {
    // Dark: nothing leaves the ground manifold, which stays unpolarized.
    SteadyState s;
    s.occupation[GS0] = mode == SpinMode::Free ? 1.0 / 3.0 : (mode == SpinMode::Ms0 ? 1.0 : 0.0);
    s.occupation[GS1] = 1.0 - s.occupation[GS0];
    return s;
  }
  const Matrix6 m = rate_matrix(rates, mode);

  // Levels reachable from the starting ground manifold(s).
  std::array<bool, kLevelCount> reachable{};
  if (mode != SpinMode::Ms1) reachable[GS0] = true;
  if (mode != SpinMode::Ms0) reachable[GS1] = true;
  for (int sweep = 0; sweep < kLevelCount; ++sweep) {
    for (int from = 0; from < kLevelCount; ++from) {
      if (!reachable[from]) continue;
      for (int to = 0; to < kLevelCount; ++to) {
        if (to != from && m(to, from) > 0.0) reachable[to] = true;
      }
    }
  }
  for (int i = 0; i < kLevelCount; ++i) {
    if (reachable[i] && m(i, i) == 0.0 && i != GS0 && i != GS1) {
      throw SingularRateSystem("stationary rate system is singular: level " + std::to_string(i) +
                               " is reachable but has no escape");
    }
  }

  // Unreachable levels are pinned to zero; one balance row is replaced by the
  // normalization.
  Matrix6 a = m;
  Vector6 rhs = Vector6::Zero();
  for (int i = 0; i < kLevelCount; ++i) {
    if (!reachable[i]) {
      a.row(i).setZero();
      a(i, i) = 1.0;
    }
  }
  int norm_row = -1;
  for (int i = 0; i < kLevelCount && norm_row < 0; ++i) {
    if (reachable[i]) norm_row = i;
  }
  a.row(norm_row).setZero();
  for (int i = 0; i < kLevelCount; ++i) {
    if (reachable[i]) a(norm_row, i) = 1.0;
  }
  rhs(norm_row) = 1.0;

  Eigen::FullPivLU<Matrix6> lu(a);
  if (!lu.isInvertible()) {
    throw SingularRateSystem("stationary rate system is singular (stationary state not unique)");
  }
  Vector6 x = lu.solve(rhs);
  // Clear round-off negatives so occupations stay a probability vector.
  x = x.cwiseMax(0.0);
  x /= x.sum();

  SteadyState s;
  for (int i = 0; i < kLevelCount; ++i) s.occupation[i] = x(i);
  const double es = x(ES0) + x(ES1);
  s.pl_rate = rates.k_rad * es;
  s.current_rate = rates.effective_ionization() * es + rates.k_rec * x(Ionized);
  return s;
}

SteadyState steady_state(const PhotoCycleRates& rates, double ms0_fraction) {
  if (!(ms0_fraction >= 0.0 && ms0_fraction <= 1.0)) {
    throw std::invalid_argument("steady_state: ms0_fraction must lie in [0, 1]");
  }
  const SteadyState s0 = solve_steady_state(rates, SpinMode::Ms0);
  const SteadyState s1 = solve_steady_state(rates, SpinMode::Ms1);
  const double f = ms0_fraction;
  SteadyState out;
  for (int i = 0; i < kLevelCount; ++i) {
    out.occupation[i] = f * s0.occupation[i] + (1.0 - f) * s1.occupation[i];
  }
  out.pl_rate = f * s0.pl_rate + (1.0 - f) * s1.pl_rate;
  out.current_rate = f * s0.current_rate + (1.0 - f) * s1.current_rate;
  return out;
}

double polarized_ms0_fraction(const PhotoCycleRates& rates) {
  const SteadyState s = solve_steady_state(rates, SpinMode::Free);
  const double g = s.occupation[GS0] + s.occupation[GS1];
  if (!(g > 0.0)) return 1.0 / 3.0;
  return s.occupation[GS0] / g;
}

double ms0_after_transfer(double p_ref, double transfer) {
  return p_ref * (1.0 - transfer) + transfer * 0.5 * (1.0 - p_ref);
}

bool pdmr_visible(const DefectSpecies& species, double photon_energy_ev) {
  if (!(photon_energy_ev > 0.0)) throw std::invalid_argument("photon energy must be > 0");
  return photon_energy_ev >=
         std::max(species.thresholds.ionization_ev, species.thresholds.recovery_ev);
}

double channel_rate(const DefectSpecies& species, double ms0_fraction, Channel channel,
                    double laser_power) {
  const auto rates = PhotoCycleRates::at_power(species.photophysics, laser_power);
  const SteadyState s = steady_state(rates, ms0_fraction);
  return channel == Channel::ODMR ? s.pl_rate : s.current_rate;
}

double readout_signal(const DefectSpecies& species, double ms0_fraction, Channel channel,
                      const ReadoutConditions& conditions) {
  if (channel == Channel::PDMR && !pdmr_visible(species, conditions.photon_energy_ev)) {
    return 0.0;
  }
  const auto rates = PhotoCycleRates::at_power(species.photophysics, conditions.laser_power);
  if (rates.k_pump == 0.0) return 0.0;
  const double p_ref = polarized_ms0_fraction(rates);
  const SteadyState s = steady_state(rates, ms0_fraction);
  const SteadyState ref = steady_state(rates, p_ref);
  const double diff = channel == Channel::ODMR ? s.pl_rate - ref.pl_rate
                                               : s.current_rate - ref.current_rate;
  return species.weight * species.sign * diff;
}

double full_inversion_signal(const DefectSpecies& species, Channel channel,
                             const ReadoutConditions& conditions) {
  const auto rates = PhotoCycleRates::at_power(species.photophysics, conditions.laser_power);
  if (rates.k_pump == 0.0) return 0.0;
  const double p_ref = polarized_ms0_fraction(rates);
  return readout_signal(species, ms0_after_transfer(p_ref, 1.0), channel, conditions);
}

}  // namespace pdmr

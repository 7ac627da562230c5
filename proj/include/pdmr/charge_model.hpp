#pragma once

// Rate-equation photophysics and charge cycling.
//
// Levels (index order): GS0, GS1, ES0, ES1, singlet, ionized. "1" collapses
// ms = +1 and -1. Optical pumping and radiative decay conserve spin; the
// excited state relaxes through the singlet with a spin-dependent rate
// (k_isc1 > k_isc0); a second photon ionizes the excited state and a third
// recovers the neutral ground state. The ionized state keeps no spin memory.

#include <array>
#include <stdexcept>

#include <Eigen/Dense>

#include "pdmr/species.hpp"

namespace pdmr {

inline constexpr int kLevelCount = 6;
enum Level : int { GS0 = 0, GS1 = 1, ES0 = 2, ES1 = 3, Singlet = 4, Ionized = 5 };

/// Rates (1/us) at one laser power.
struct PhotoCycleRates {
  double k_pump = 0.0;
  double k_rad = 0.0;
  double k_isc0 = 0.0;
  double k_isc1 = 0.0;
  double k_singlet = 0.0;
  double singlet_to_ms0 = 1.0;
  double k_ion = 0.0;
  double k_rec = 0.0;
  double sigma_ion = 1.0;

  static PhotoCycleRates at_power(const Photophysics& p, double laser_power);

  double effective_ionization() const { return k_ion * sigma_ion; }
  void validate() const;
};

class SingularRateSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Occupation = std::array<double, kLevelCount>;

struct SteadyState {
  Occupation occupation{};
  double pl_rate = 0.0;
  double current_rate = 0.0;
};

/// Which ground-state spin bookkeeping applies.
enum class SpinMode {
  /// MW off: singlet and ionized returns split over the spin manifolds, so
  /// the ground-state polarization is an output.
  Free,
  /// Spin label frozen at ms = 0 for the readout (all returns to GS0).
  Ms0,
  /// Spin label frozen at ms = 1.
  Ms1,
};

/// Generator matrix M with dn/dt = M n.
Eigen::Matrix<double, kLevelCount, kLevelCount> rate_matrix(const PhotoCycleRates& rates,
                                                            SpinMode mode);

/// Stationary occupation for one spin mode. Throws SingularRateSystem when a
/// reachable level has no escape or the stationary state is not unique. With
/// no optical pumping the ground state is returned unpolarized (Free) or at
/// the frozen spin label.
SteadyState solve_steady_state(const PhotoCycleRates& rates, SpinMode mode);

/// Stationary readout of an ensemble in which a fraction `ms0_fraction` of
/// the defects is in ms = 0 during readout: the convex mixture of the two
/// spin-frozen solutions. pl_rate = k_rad (ES0 + ES1);
/// current_rate = k_ion sigma (ES0 + ES1) + k_rec * ionized.
SteadyState steady_state(const PhotoCycleRates& rates, double ms0_fraction);

/// Ground-state ms = 0 fraction of the laser-polarized (MW off) steady state.
double polarized_ms0_fraction(const PhotoCycleRates& rates);

/// ms = 0 fraction after a MW transfer of probability `transfer` between |0>
/// and one of the ms = +-1 eigenstates, starting from polarization p_ref
/// (the remainder split evenly between |+> and |->).
double ms0_after_transfer(double p_ref, double transfer);

struct ReadoutConditions {
  double laser_power = 10.0;
  /// 905 nm excitation.
  double photon_energy_ev = 1239.841984 / 905.0;
};

/// True when the photon energy covers both the ionization and the recovery
/// threshold, so continuous charge cycling is possible.
bool pdmr_visible(const DefectSpecies& species, double photon_energy_ev);

/// Rate in the chosen channel for a given ms0 fraction.
double channel_rate(const DefectSpecies& species, double ms0_fraction, Channel channel,
                    double laser_power);

/// Differential response weight * sign * [rate(ms0_fraction) - rate(p_ref)],
/// p_ref being the laser-polarized fraction. Zero in PDMR when the species
/// cannot charge-cycle at the photon energy.
double readout_signal(const DefectSpecies& species, double ms0_fraction, Channel channel,
                      const ReadoutConditions& conditions);

/// Response to a complete transfer out of the polarized state (q = 1).
double full_inversion_signal(const DefectSpecies& species, Channel channel,
                             const ReadoutConditions& conditions);

}  // namespace pdmr

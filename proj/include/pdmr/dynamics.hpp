#pragma once

// Coherent evolution of a driven spin-1 at zero field.
//
// Convention: a coupling omega (MHz) is the on-resonance population
// oscillation frequency. The lab-frame drive term is
//   V(t) = cos(2 pi f t + phase) (omega_x Sx + omega_y Sy + omega_z Sz),
// and the propagator is exp(-i 2 pi H dt) with H in MHz and dt in us. Under
// the rotating-wave approximation this gives p0(t) = cos^2(pi omega t).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pdmr/geometry.hpp"
#include "pdmr/species.hpp"
#include "pdmr/spin_core.hpp"

namespace pdmr {

struct DriveParams {
  double frequency_mhz = 0.0;
  double omega_x = 0.0;
  double omega_y = 0.0;
  double omega_z = 0.0;
  double phase_rad = 0.0;

  void validate() const;
};

struct Populations {
  double p0 = 1.0;
  double p_plus = 0.0;
  double p_minus = 0.0;

  double total() const { return p0 + p_plus + p_minus; }
};

struct Trajectory {
  std::vector<double> time_us;
  std::vector<Populations> populations;
};

enum class Stepper {
  /// Drive sampled at the step midpoint. Second order; the staircase drive
  /// under-represents the carrier by sinc(pi f dt).
  Midpoint,
  /// Two-exponential commutator-free Magnus scheme at the Gauss points.
  /// Fourth order.
  Magnus4,
};

class StepSizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Full lab-frame propagation from |0>. Requires dt <= 1 / (20 f). The
/// trajectory is sampled every `sample_every` steps (and at t = 0).
Trajectory propagate_full(const ZfsParams& zfs, const DriveParams& drive, double t_final_us,
                          double dt_us, Stepper stepper = Stepper::Magnus4,
                          int sample_every = 1);

/// Two-level RWA: p0 = 1 - W sin^2(pi sqrt(omega^2 + delta^2) t), with
/// W = omega^2 / (omega^2 + delta^2).
double rabi_rwa(double coupling_mhz, double detuning_mhz, double t_us);

/// Per-orientation couplings for one transition of a species (MHz), including
/// the species rabi_scale. Basal: omega_x for Plus, omega_y for Minus. Axial:
/// the transverse field magnitude (single orientation).
std::vector<double> transition_couplings(const DefectSpecies& species, const MwField& field,
                                         Transition transition);

/// Discrete Rabi spectrum: distinct coupling frequencies with the fraction of
/// orientations at each.
struct RabiLine {
  double frequency_mhz;
  double weight;
};

std::vector<RabiLine> ensemble_rabi_lines(const DefectSpecies& species, const MwField& field,
                                          Transition transition);

struct RabiTrace {
  std::vector<double> time_us;
  std::vector<double> signal;
  std::optional<Channel> channel;
  double drive_frequency_mhz = 0.0;
  double mw_power = 0.0;

  /// Throws unless the grid is strictly increasing and uniform and the signal
  /// is finite with one value per time point.
  void validate() const;
};

struct EnsembleRabiOptions {
  double detuning_mhz = 0.0;
  /// 1/e time of each component's envelope; <= 0 disables decay.
  double decay_time_us = 2.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  /// Linear drift added to the signal (intercept + slope * t).
  double drift_intercept = 0.0;
  double drift_slope_per_us = 0.0;
};

/// Mean |0> population over the orientations after a pulse of each duration.
/// Orientations are equally weighted; each contributes a damped cosine at its
/// generalized Rabi frequency.
RabiTrace simulate_ensemble_rabi(const DefectSpecies& species, const MwField& field,
                                 Transition transition, const std::vector<double>& durations_us,
                                 const EnsembleRabiOptions& options = {});

/// Noise-free |0> population of one orientation (RWA with envelope).
double damped_rabi_population(double coupling_mhz, double detuning_mhz, double t_us,
                              double decay_time_us);

/// Uniform grid t0, t0 + step, ... with `count` points.
std::vector<double> uniform_grid(double t0, double step, std::size_t count);

}  // namespace pdmr

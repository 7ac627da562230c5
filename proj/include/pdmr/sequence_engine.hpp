#pragma once

// Pulsed ODMR/PDMR protocols: laser initialization, MW pulses, readout, with
// square-wave amplitude modulation of one MW tone and lock-in demodulation.

#include <cstdint>
#include <optional>
#include <vector>

#include "pdmr/charge_model.hpp"
#include "pdmr/dynamics.hpp"
#include "pdmr/geometry.hpp"
#include "pdmr/species.hpp"

namespace pdmr {

enum class SegmentKind { Laser, Mw, Wait, Readout };

struct MwPulse {
  int tone = 0;
  double frequency_mhz = 0.0;
  double power = 1.0;
  /// Fixed pulse length. When empty the engine applies a pi pulse calibrated
  /// per transition on the median orientation coupling at nominal power.
  std::optional<double> duration_us;
};

struct Segment {
  SegmentKind kind = SegmentKind::Wait;
  double duration_us = 1.0;
  std::optional<MwPulse> mw;
};

/// Square-wave envelope on one MW tone: on for the first half of each period
/// (counted in sequence repetitions), off for the second.
struct Modulation {
  int target_tone = 0;
  int period_reps = 2;
};

struct PulseSequence {
  std::vector<Segment> segments;
  std::optional<Modulation> modulation;

  /// Durations > 0, exactly one readout, MW segments carry a pulse, and the
  /// modulated tone exists.
  void validate() const;

  /// Laser init, one MW tone, readout; tone 0 modulated.
  static PulseSequence pulsed(double frequency_mhz, double mw_power);

  /// Laser init, MW1 (tone 0, modulated) then MW2 (tone 1), readout.
  static PulseSequence two_frequency(double f1_mhz, double f2_mhz, double mw_power);
};

/// mean(on samples) - mean(off samples) for a square-wave reference. The
/// sample count must cover an integer number of periods.
double demodulate_square(const std::vector<double>& samples, int period_reps);

/// Envelope state (true = on) for a repetition index.
bool envelope_on(int repetition, int period_reps);

struct EngineSettings {
  /// Field at nominal MW power; other powers scale b1 by sqrt(P / P_nominal).
  MwField nominal_field = MwField::tilted(5.0);
  double nominal_mw_power = 1.0;
  ReadoutConditions readout;
  double linewidth_fwhm_mhz = 2.0;
  /// Transitions detuned by more than this many FWHM are not driven.
  double address_window_fwhm = 4.0;
  int repetitions = 200;
  int modulation_period_reps = 2;
  /// Standard deviation of each demodulated output point.
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  MwField field_at(double mw_power) const;
  void validate() const;
};

struct Spectrum {
  std::vector<double> freq_mhz;
  std::vector<double> signal;
  Channel channel = Channel::ODMR;
  double laser_power = 0.0;
  double mw_power = 0.0;
  std::uint64_t seed = 0;
};

/// Lorentzian line profile (peak 1) truncated to the addressing window.
double addressed_lineshape(double detuning_mhz, const EngineSettings& settings);

/// Mean ms = 0 fraction of one species after one repetition of `sequence`
/// with the modulated tone on or off.
double execute_repetition(const PulseSequence& sequence, const DefectSpecies& species,
                          const EngineSettings& settings, bool modulated_tone_on);

/// Lock-in demodulated signal of the whole registry for one sequence,
/// noise keyed by `stream`.
double demodulated_signal(const PulseSequence& sequence, const Registry& registry,
                          Channel channel, const EngineSettings& settings, std::uint64_t stream);

Spectrum run_pulsed_spectrum(const Registry& registry, Channel channel, double f_start_mhz,
                             double f_stop_mhz, double step_mhz, double mw_power,
                             const EngineSettings& settings);

class NoMatchingTransition : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RabiSweepOptions {
  double decay_time_us = 2.0;
  /// Noise relative to the full-inversion signal of the addressed species.
  double noise_rel = 0.0;
  double drift_intercept_rel = 0.0;
  double drift_slope_rel_per_us = 0.0;
  std::uint64_t seed = 0;
};

/// Rabi duration sweep at `frequency_mhz`: every species transition within one
/// linewidth contributes its ensemble oscillation through the channel readout.
RabiTrace run_rabi_sweep(const Registry& registry, double frequency_mhz,
                         const std::vector<double>& durations_us, double mw_power,
                         Channel channel, const EngineSettings& settings,
                         const RabiSweepOptions& options = {});

/// Two-frequency spectrum with MW1 at f1 modulated: the lock-in output with
/// MW2 at f2 minus the lock-in output with MW2 off.
Spectrum run_two_frequency(const Registry& registry, double f1_mhz, double f2_start_mhz,
                           double f2_stop_mhz, double step_mhz, double mw_power,
                           Channel channel, const EngineSettings& settings);

/// Largest |full inversion signal| over the registry's visible species.
double channel_full_scale(const Registry& registry, Channel channel,
                          const ReadoutConditions& readout);

std::vector<double> frequency_grid(double f_start_mhz, double f_stop_mhz, double step_mhz);

}  // namespace pdmr

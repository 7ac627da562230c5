#pragma once

#include <string>
#include <vector>

#include "pdmr/spin_core.hpp"

namespace pdmr {

enum class OrientationClass { Axial, Basal };
enum class Channel { ODMR, PDMR };

const char* to_string(OrientationClass c);
const char* to_string(Channel c);
Channel channel_from_string(const std::string& s);

/// Power-independent photophysics of one species. Rates are in 1/us; the
/// optical pump, ionization and recovery rates scale linearly with laser power
/// (arbitrary units, only ratios meaningful).
struct Photophysics {
  double pump_per_power = 20.0;
  double k_rad = 0.95 / 0.013;
  double k_isc0 = 0.05 / 0.013;
  double k_isc1 = 5.0 * 0.05 / 0.013;
  double k_singlet = 1.0 / 0.2;
  /// Fraction of singlet decays that land in ms = 0.
  double singlet_to_ms0 = 0.75;
  double ion_per_power = 0.02;
  double recovery_per_power = 10.0;
  /// Species ionization cross-section, multiplies the ionization rate.
  double sigma_ion = 1.0;
};

struct EnergyThresholds {
  double zpl_ev = 0.0;
  double ionization_ev = 0.0;
  double recovery_ev = 0.0;
};

enum class Provenance { Paper, Assumed };

const char* to_string(Provenance p);

struct SpeciesProvenance {
  Provenance zfs = Provenance::Paper;
  Provenance thresholds = Provenance::Assumed;
  Provenance rates = Provenance::Assumed;
};

struct DefectSpecies {
  std::string name;
  ZfsParams zfs{1.0, 0.0};
  OrientationClass orientation = OrientationClass::Basal;
  Photophysics photophysics;
  EnergyThresholds thresholds;
  /// +1 for ordinary resonances, -1 for the minor opposite-sign features.
  int sign = 1;
  double weight = 1.0;
  /// Relative drive-coupling strength (transition-moment scale).
  double rabi_scale = 1.0;
  /// Transitions that exist but produce no resonance (not driven).
  std::vector<Transition> dark_transitions;
  SpeciesProvenance provenance;

  /// Observable transitions: a single line at D for axial species (E = 0),
  /// otherwise Minus and Plus minus any dark ones.
  std::vector<Transition> driven_transitions() const;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

using Registry = std::vector<DefectSpecies>;

/// Unique names, every species valid.
void validate_registry(const Registry& registry);

}  // namespace pdmr

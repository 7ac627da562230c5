#include "pdmr/species.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace pdmr {

const char* to_string(OrientationClass c) {
  return c == OrientationClass::Axial ? "axial" : "basal";
}

const char* to_string(Channel c) { return c == Channel::ODMR ? "ODMR" : "PDMR"; }

Channel channel_from_string(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char ch) { return std::toupper(ch); });
  if (u == "ODMR") return Channel::ODMR;
  if (u == "PDMR") return Channel::PDMR;
  throw std::invalid_argument("unknown channel '" + s + "' (expected ODMR or PDMR)");
}

const char* to_string(Provenance p) { return p == Provenance::Paper ? "paper" : "assumed"; }

std::vector<Transition> DefectSpecies::driven_transitions() const {
  std::vector<Transition> out;
  auto dark = [&](Transition t) {
    return std::find(dark_transitions.begin(), dark_transitions.end(), t) !=
           dark_transitions.end();
  };
  if (orientation == OrientationClass::Axial) {
    if (!dark(Transition::Plus)) out.push_back(Transition::Plus);
    return out;
  }
  for (Transition t : {Transition::Minus, Transition::Plus}) {
    if (!dark(t)) out.push_back(t);
  }
  return out;
}

void DefectSpecies::validate() const {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("species '" + name + "': " + what);
  };
  if (name.empty()) fail("name must be non-empty");
  if (orientation == OrientationClass::Axial && zfs.e_mhz() != 0.0) {
    fail("axial species must have E = 0");
  }
  if (!(thresholds.zpl_ev > 0.0 && thresholds.ionization_ev > 0.0 &&
        thresholds.recovery_ev > 0.0)) {
    fail("energy thresholds must be > 0");
  }
  if (!(weight >= 0.0)) fail("weight must be >= 0");
  if (sign != 1 && sign != -1) fail("sign must be +1 or -1");
  if (!(rabi_scale > 0.0)) fail("rabi_scale must be > 0");
  const auto& p = photophysics;
  for (double r : {p.pump_per_power, p.k_rad, p.k_isc0, p.k_isc1, p.k_singlet, p.ion_per_power,
                   p.recovery_per_power, p.sigma_ion}) {
    if (!(r >= 0.0)) fail("rates must be >= 0");
  }
  if (!(p.k_isc1 > p.k_isc0)) fail("k_isc1 must exceed k_isc0");
  if (!(p.singlet_to_ms0 >= 0.0 && p.singlet_to_ms0 <= 1.0)) {
    fail("singlet_to_ms0 must lie in [0, 1]");
  }
}

void validate_registry(const Registry& registry) {
  std::set<std::string> names;
  for (const auto& s : registry) {
    s.validate();
    if (!names.insert(s.name).second) {
      throw std::invalid_argument("duplicate species name '" + s.name + "'");
    }
  }
}

}  // namespace pdmr

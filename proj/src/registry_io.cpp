#include "pdmr/registry_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace pdmr {

using nlohmann::json;

void require_known_keys(const json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw SchemaError(where + ": unknown key '" + key + "'");
    }
  }
}

namespace {

double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw SchemaError(where + ": missing '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) throw SchemaError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

Provenance provenance_from(const json& v, const std::string& where) {
  if (v == "paper") return Provenance::Paper;
  if (v == "assumed") return Provenance::Assumed;
  throw SchemaError(where + ": provenance must be \"paper\" or \"assumed\"");
}

DefectSpecies parse_species(const json& j, std::size_t index) {
  std::string where = "registry[" + std::to_string(index) + "]";
  require_known_keys(j, {"name", "d_mhz", "e_mhz", "orientation_class", "weight", "sign",
                         "rabi_scale", "dark_transitions", "thresholds_ev", "rates", "provenance"},
                     where);
  DefectSpecies s;
  if (!j.contains("name") || !j.at("name").is_string()) throw SchemaError(where + ": missing 'name'");
  s.name = j.at("name").get<std::string>();
  where += " (" + s.name + ")";
  try {
    s.zfs = ZfsParams(number(j, "d_mhz", where), number(j, "e_mhz", where));
  } catch (const SchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where + ": " + e.what());
  }
  if (!j.contains("orientation_class")) throw SchemaError(where + ": missing 'orientation_class'");
  const json& oc = j.at("orientation_class");
  if (oc == "axial") {
    s.orientation = OrientationClass::Axial;
  } else if (oc == "basal") {
    s.orientation = OrientationClass::Basal;
  } else {
    throw SchemaError(where + ": orientation_class must be \"axial\" or \"basal\"");
  }
  s.weight = number_or(j, "weight", 1.0, where);
  if (j.contains("sign")) {
    if (!j.at("sign").is_number_integer()) throw SchemaError(where + ": 'sign' must be +1 or -1");
    s.sign = j.at("sign").get<int>();
  }
  s.rabi_scale = number_or(j, "rabi_scale", 1.0, where);
  if (j.contains("dark_transitions")) {
    const json& d = j.at("dark_transitions");
    if (!d.is_array()) throw SchemaError(where + ": 'dark_transitions' must be an array");
    for (const auto& t : d) {
      if (t == "plus") {
        s.dark_transitions.push_back(Transition::Plus);
      } else if (t == "minus") {
        s.dark_transitions.push_back(Transition::Minus);
      } else {
        throw SchemaError(where + ": dark transition must be \"plus\" or \"minus\"");
      }
    }
  }
  if (!j.contains("thresholds_ev")) throw SchemaError(where + ": missing 'thresholds_ev'");
  const json& th = j.at("thresholds_ev");
  require_known_keys(th, {"zpl", "ionization", "recovery"}, where + ".thresholds_ev");
  s.thresholds.zpl_ev = number(th, "zpl", where + ".thresholds_ev");
  s.thresholds.ionization_ev = number(th, "ionization", where + ".thresholds_ev");
  s.thresholds.recovery_ev = number(th, "recovery", where + ".thresholds_ev");
  if (j.contains("rates")) {
    const json& r = j.at("rates");
    const std::string rw = where + ".rates";
    require_known_keys(r, {"pump_per_power", "k_rad", "k_isc0", "k_isc1", "k_singlet",
                           "singlet_to_ms0", "ion_per_power", "recovery_per_power", "sigma_ion"},
                       rw);
    auto& p = s.photophysics;
    p.pump_per_power = number_or(r, "pump_per_power", p.pump_per_power, rw);
    p.k_rad = number_or(r, "k_rad", p.k_rad, rw);
    p.k_isc0 = number_or(r, "k_isc0", p.k_isc0, rw);
    p.k_isc1 = number_or(r, "k_isc1", p.k_isc1, rw);
    p.k_singlet = number_or(r, "k_singlet", p.k_singlet, rw);
    p.singlet_to_ms0 = number_or(r, "singlet_to_ms0", p.singlet_to_ms0, rw);
    p.ion_per_power = number_or(r, "ion_per_power", p.ion_per_power, rw);
    p.recovery_per_power = number_or(r, "recovery_per_power", p.recovery_per_power, rw);
    p.sigma_ion = number_or(r, "sigma_ion", p.sigma_ion, rw);
  }
  if (j.contains("provenance")) {
    const json& pv = j.at("provenance");
    const std::string pw = where + ".provenance";
    if (pv.is_string()) {
      const Provenance all = provenance_from(pv, pw);
      s.provenance = {all, all, all};
    } else {
      require_known_keys(pv, {"zfs", "thresholds", "rates"}, pw);
      if (pv.contains("zfs")) s.provenance.zfs = provenance_from(pv.at("zfs"), pw);
      if (pv.contains("thresholds")) s.provenance.thresholds = provenance_from(pv.at("thresholds"), pw);
      if (pv.contains("rates")) s.provenance.rates = provenance_from(pv.at("rates"), pw);
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where + ": " + e.what());
  }
  return s;
}

const char* transition_key(Transition t) { return t == Transition::Plus ? "plus" : "minus"; }

}  // namespace

Registry parse_registry(const json& doc) {
  if (!doc.is_array()) throw SchemaError("registry: document must be an array of species");
  Registry reg;
  for (std::size_t i = 0; i < doc.size(); ++i) reg.push_back(parse_species(doc[i], i));
  try {
    validate_registry(reg);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("registry: ") + e.what());
  }
  return reg;
}

Registry parse_registry(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("registry: invalid JSON: ") + e.what());
  }
  return parse_registry(doc);
}

Registry load_registry_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("registry: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_registry(std::string_view(ss.str()));
}

Registry load_default_registry() { return parse_registry(default_registry_json()); }

json registry_to_json(const Registry& registry) {
  json out = json::array();
  for (const auto& s : registry) {
    json j;
    j["name"] = s.name;
    j["d_mhz"] = s.zfs.d_mhz();
    j["e_mhz"] = s.zfs.e_mhz();
    j["orientation_class"] = s.orientation == OrientationClass::Axial ? "axial" : "basal";
    j["weight"] = s.weight;
    j["sign"] = s.sign;
    j["rabi_scale"] = s.rabi_scale;
    json dark = json::array();
    for (Transition t : s.dark_transitions) dark.push_back(transition_key(t));
    j["dark_transitions"] = dark;
    j["thresholds_ev"] = {{"zpl", s.thresholds.zpl_ev},
                          {"ionization", s.thresholds.ionization_ev},
                          {"recovery", s.thresholds.recovery_ev}};
    const auto& p = s.photophysics;
    j["rates"] = {{"pump_per_power", p.pump_per_power},
                  {"k_rad", p.k_rad},
                  {"k_isc0", p.k_isc0},
                  {"k_isc1", p.k_isc1},
                  {"k_singlet", p.k_singlet},
                  {"singlet_to_ms0", p.singlet_to_ms0},
                  {"ion_per_power", p.ion_per_power},
                  {"recovery_per_power", p.recovery_per_power},
                  {"sigma_ion", p.sigma_ion}};
    j["provenance"] = {{"zfs", to_string(s.provenance.zfs)},
                       {"thresholds", to_string(s.provenance.thresholds)},
                       {"rates", to_string(s.provenance.rates)}};
    out.push_back(j);
  }
  return out;
}

json provenance_report(const Registry& registry) {
  json species = json::object();
  json assumed = json::array();
  for (const auto& s : registry) {
    species[s.name] = {{"zfs", to_string(s.provenance.zfs)},
                       {"thresholds", to_string(s.provenance.thresholds)},
                       {"rates", to_string(s.provenance.rates)}};
    if (s.provenance.zfs == Provenance::Assumed) assumed.push_back(s.name + ".zfs");
    if (s.provenance.thresholds == Provenance::Assumed) assumed.push_back(s.name + ".thresholds");
    if (s.provenance.rates == Provenance::Assumed) assumed.push_back(s.name + ".rates");
  }
  return {{"species", species}, {"assumed", assumed}};
}

}  // namespace pdmr

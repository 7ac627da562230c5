#include "pdmr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pdmr/registry_io.hpp"

namespace pdmr {

using nlohmann::json;

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Spectrum: return "spectrum";
    case ExperimentKind::Rabi: return "rabi";
    case ExperimentKind::FitRabi: return "fit_rabi";
    case ExperimentKind::RabiPower: return "rabi_power";
    case ExperimentKind::TwoFreq: return "two_freq";
    case ExperimentKind::PowerSweep: return "power_sweep";
    case ExperimentKind::Assign: return "assign";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::Spectrum, ExperimentKind::Rabi, ExperimentKind::FitRabi,
                 ExperimentKind::RabiPower, ExperimentKind::TwoFreq, ExperimentKind::PowerSweep,
                 ExperimentKind::Assign}) {
    if (s == to_string(k)) return k;
  }
  throw SchemaError("config: unknown experiment kind '" + s + "'");
}

double default_noise(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Rabi:
    case ExperimentKind::RabiPower:
      return kDefaultRabiNoise;
    default:
      return kDefaultSpectrumNoise;
  }
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw std::invalid_argument("log_grid: need 0 < lo < hi, count >= 2");
  std::vector<double> g(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw SchemaError("config: " + m); };
  if (!(f_start_mhz < f_stop_mhz)) fail("f_start_mhz must be below f_stop_mhz");
  if (!(step_mhz > 0.0)) fail("step_mhz must be > 0");
  if (!(t_max_us > 0.0) || !(dt_us > 0.0) || dt_us >= t_max_us) fail("need 0 < dt_us < t_max_us");
  if (!(laser_power >= 0.0)) fail("laser_power must be >= 0");
  if (!(mw_power >= 0.0)) fail("mw_power must be >= 0");
  if (noise && !(*noise >= 0.0)) fail("noise must be >= 0");
  if (n_max < 1) fail("n_max must be >= 1");
  if (!(linewidth_fwhm_mhz > 0.0)) fail("linewidth_fwhm_mhz must be > 0");
  if (!(b1_mhz > 0.0)) fail("b1_mhz must be > 0");
  if (repetitions < 2 || repetitions % 2 != 0) fail("repetitions must be even and >= 2");
  for (double p : mw_powers) {
    if (!(p > 0.0)) fail("mw_powers must be > 0");
  }
  for (double p : laser_powers) {
    if (!(p > 0.0)) fail("laser_powers must be > 0");
  }
  if (!std::is_sorted(mw_powers.begin(), mw_powers.end())) fail("mw_powers must be ascending");
  if (!std::is_sorted(laser_powers.begin(), laser_powers.end())) fail("laser_powers must be ascending");
}

EngineSettings ExperimentConfig::engine_settings(const Registry& registry) const {
  EngineSettings s;
  s.nominal_field = MwField::tilted(b1_mhz, field_elevation_deg);
  s.readout.laser_power = laser_power;
  s.linewidth_fwhm_mhz = linewidth_fwhm_mhz;
  s.repetitions = repetitions;
  s.seed = seed;
  const double rel = noise.value_or(default_noise(kind));
  s.noise_sigma = rel * channel_full_scale(registry, channel, s.readout);
  s.validate();
  return s;
}

namespace {

double num(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number()) throw SchemaError(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> num_list(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_array()) throw SchemaError(std::string("config: '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw SchemaError(std::string("config: '") + key + "' entries must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

void apply_config_json(const json& doc, ExperimentConfig& cfg) {
  require_known_keys(doc,
                     {"kind", "channel", "f_start_mhz", "f_stop_mhz", "step_mhz", "f1_mhz",
                      "rabi_frequency_mhz", "t_max_us", "dt_us", "decay_time_us", "laser_power",
                      "mw_power", "noise", "drift_intercept", "drift_slope_per_us", "seed",
                      "out_dir", "mw_powers", "laser_powers", "n_max", "fit", "input",
                      "linewidth_fwhm_mhz", "b1_mhz", "field_elevation_deg", "repetitions"},
                     "config");
  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) throw SchemaError("config: 'kind' must be a string");
    cfg.kind = experiment_kind_from_string(doc["kind"].get<std::string>());
  }
  if (doc.contains("channel")) {
    if (!doc["channel"].is_string()) throw SchemaError("config: 'channel' must be a string");
    try {
      cfg.channel = channel_from_string(doc["channel"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("config: ") + e.what());
    }
  }
  if (doc.contains("f_start_mhz")) cfg.f_start_mhz = num(doc, "f_start_mhz");
  if (doc.contains("f_stop_mhz")) cfg.f_stop_mhz = num(doc, "f_stop_mhz");
  if (doc.contains("step_mhz")) cfg.step_mhz = num(doc, "step_mhz");
  if (doc.contains("f1_mhz")) {
    cfg.f1_mhz = doc["f1_mhz"].is_array() ? num_list(doc, "f1_mhz") : std::vector<double>{num(doc, "f1_mhz")};
  }
  if (doc.contains("rabi_frequency_mhz")) cfg.rabi_frequency_mhz = num(doc, "rabi_frequency_mhz");
  if (doc.contains("t_max_us")) cfg.t_max_us = num(doc, "t_max_us");
  if (doc.contains("dt_us")) cfg.dt_us = num(doc, "dt_us");
  if (doc.contains("decay_time_us")) cfg.decay_time_us = num(doc, "decay_time_us");
  if (doc.contains("laser_power")) cfg.laser_power = num(doc, "laser_power");
  if (doc.contains("mw_power")) cfg.mw_power = num(doc, "mw_power");
  if (doc.contains("noise")) cfg.noise = num(doc, "noise");
  if (doc.contains("drift_intercept")) cfg.drift_intercept = num(doc, "drift_intercept");
  if (doc.contains("drift_slope_per_us")) cfg.drift_slope_per_us = num(doc, "drift_slope_per_us");
  if (doc.contains("seed")) {
    const auto& sd = doc["seed"];
    if (!sd.is_number_integer() || (!sd.is_number_unsigned() && sd.get<std::int64_t>() < 0)) throw SchemaError("config: 'seed' must be a non-negative integer");
    cfg.seed = sd.get<std::uint64_t>();
  }
  if (doc.contains("out_dir")) {
    if (!doc["out_dir"].is_string()) throw SchemaError("config: 'out_dir' must be a string");
    cfg.out_dir = doc["out_dir"].get<std::string>();
  }
  if (doc.contains("mw_powers")) cfg.mw_powers = num_list(doc, "mw_powers");
  if (doc.contains("laser_powers")) cfg.laser_powers = num_list(doc, "laser_powers");
  if (doc.contains("n_max")) {
    if (!doc["n_max"].is_number_integer()) throw SchemaError("config: 'n_max' must be an integer");
    cfg.n_max = doc["n_max"].get<int>();
  }
  if (doc.contains("fit")) {
    if (!doc["fit"].is_boolean()) throw SchemaError("config: 'fit' must be a boolean");
    cfg.fit = doc["fit"].get<bool>();
  }
  if (doc.contains("input")) {
    if (!doc["input"].is_string()) throw SchemaError("config: 'input' must be a string");
    cfg.input = doc["input"].get<std::string>();
  }
  if (doc.contains("linewidth_fwhm_mhz")) cfg.linewidth_fwhm_mhz = num(doc, "linewidth_fwhm_mhz");
  if (doc.contains("b1_mhz")) cfg.b1_mhz = num(doc, "b1_mhz");
  if (doc.contains("field_elevation_deg")) cfg.field_elevation_deg = num(doc, "field_elevation_deg");
  if (doc.contains("repetitions")) {
    if (!doc["repetitions"].is_number_integer()) throw SchemaError("config: 'repetitions' must be an integer");
    cfg.repetitions = doc["repetitions"].get<int>();
  }
}

void apply_config_file(const std::filesystem::path& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw SchemaError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: invalid JSON: ") + e.what());
  }
  apply_config_json(doc, cfg);
}

void prepare_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw SchemaError("config: cannot create output directory " + dir.string());
  }
  const auto probe = dir / ".pdmr_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw SchemaError("config: output directory not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace pdmr

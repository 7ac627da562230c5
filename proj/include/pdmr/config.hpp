#pragma once

// Experiment configuration shared by the CLI subcommands. Loaded from JSON
// (unknown keys rejected) and then overridden by explicit flags.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmr/sequence_engine.hpp"
#include "pdmr/species.hpp"

namespace pdmr {

enum class ExperimentKind { Spectrum, Rabi, FitRabi, RabiPower, TwoFreq, PowerSweep, Assign };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Spectrum;
  Channel channel = Channel::ODMR;
  double f_start_mhz = 1100.0;
  double f_stop_mhz = 1400.0;
  double step_mhz = 0.2;
  /// MW1 frequencies for two-frequency scans.
  std::vector<double> f1_mhz{1332.6};
  /// Drive frequency of Rabi sweeps.
  double rabi_frequency_mhz = 1332.6;
  double t_max_us = 5.0;
  double dt_us = 0.02;
  double decay_time_us = 2.0;
  double laser_power = 10.0;
  double mw_power = 1.0;
  /// Noise relative to the channel's full-inversion scale; empty selects the
  /// per-experiment default.
  std::optional<double> noise;
  double drift_intercept = 0.0;
  double drift_slope_per_us = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  std::vector<double> mw_powers;
  std::vector<double> laser_powers;
  int n_max = 5;
  bool fit = false;
  std::filesystem::path input;
  double linewidth_fwhm_mhz = 2.0;
  double b1_mhz = 5.0;
  double field_elevation_deg = 45.0;
  int repetitions = 200;

  /// Ordered sweep bounds, positive steps, non-negative powers and noise.
  void validate() const;

  EngineSettings engine_settings(const Registry& registry) const;
};

inline constexpr double kDefaultSpectrumNoise = 0.005;
inline constexpr double kDefaultRabiNoise = 0.02;

double default_noise(ExperimentKind kind);

/// Log-spaced grid with `count` points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// Applies the keys of a config document to `cfg`. Unknown keys throw
/// SchemaError.
void apply_config_json(const nlohmann::json& doc, ExperimentConfig& cfg);
void apply_config_file(const std::filesystem::path& path, ExperimentConfig& cfg);

/// Creates the output directory and checks that it is writable.
void prepare_out_dir(const std::filesystem::path& dir);

}  // namespace pdmr

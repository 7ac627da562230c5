#pragma once

// Subcommand implementations. Each writes its files into cfg.out_dir and
// returns a process exit code.

#include <ostream>

#include <json.hpp>

#include "pdmr/config.hpp"
#include "pdmr/peaks.hpp"
#include "pdmr/rabi_fit.hpp"
#include "pdmr/species.hpp"

namespace pdmr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFit = 2;
inline constexpr int kExitAmbiguity = 3;

int cmd_simulate_spectrum(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log);
int cmd_simulate_rabi(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log);
int cmd_fit_rabi(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log);
int cmd_rabi_power(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log);
int cmd_two_freq(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log);
int cmd_assign(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log);
int cmd_power_sweep(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log);

/// Dispatch on cfg.kind.
int run_command(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log);

nlohmann::json peak_fit_json(const PeakFitResult& fit);
nlohmann::json rabi_fit_json(const RabiComponentFit& fit);

struct SignalPowerSweep {
  std::vector<double> laser_power;
  /// [species][power] absolute full-inversion signal per channel.
  std::vector<std::vector<double>> odmr;
  std::vector<std::vector<double>> pdmr;
};

SignalPowerSweep laser_power_sweep(const Registry& registry, const std::vector<double>& powers,
                                   const ReadoutConditions& base);

/// Log-log slope over the points with power >= max_power / 10.
double top_decade_slope(const std::vector<double>& powers, const std::vector<double>& values);

}  // namespace pdmr

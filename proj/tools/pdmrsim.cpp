// pdmrsim: zero-field ODMR/PDMR simulation and analysis front end.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "pdmr/commands.hpp"
#include "pdmr/registry_io.hpp"

namespace {

struct Flags {
  std::string registry;
  std::string config;
  std::string channel;
  std::uint64_t seed = 0;
  double noise = 0.0;
  double laser_power = 0.0;
  double mw_power = 0.0;
  bool fit = false;
  std::string out_dir;
  double f_start = 0.0, f_stop = 0.0, step = 0.0;
  double frequency = 0.0;
  std::vector<double> f1;
  double t_max = 0.0, dt = 0.0;
  int n_max = 0;
  std::string input;
  std::vector<double> mw_powers, laser_powers;
  double drift_intercept = 0.0, drift_slope = 0.0;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--registry", f.registry, "Defect registry JSON (default: bundled)");
  sub->add_option("--config", f.config, "Experiment config JSON");
  sub->add_option("--channel", f.channel, "ODMR or PDMR");
  sub->add_option("--seed", f.seed, "Noise seed");
  sub->add_option("--noise", f.noise, "Noise sigma relative to the channel full scale");
  sub->add_option("--laser-power", f.laser_power, "Laser power (arb.)");
  sub->add_option("--mw-power", f.mw_power, "MW power (arb.; nominal 1)");
  sub->add_option("--out-dir", f.out_dir, "Output directory");
}

void add_sweep(CLI::App* sub, Flags& f) {
  sub->add_option("--f-start", f.f_start, "Sweep start (MHz)");
  sub->add_option("--f-stop", f.f_stop, "Sweep stop (MHz)");
  sub->add_option("--step", f.step, "Sweep step (MHz)");
}

void add_rabi(CLI::App* sub, Flags& f) {
  sub->add_option("--frequency", f.frequency, "Drive frequency (MHz)");
  sub->add_option("--t-max", f.t_max, "Longest pulse (us)");
  sub->add_option("--dt", f.dt, "Pulse duration step (us)");
  sub->add_option("--n-max", f.n_max, "Largest component count tried");
  sub->add_option("--drift-intercept", f.drift_intercept, "Linear background intercept (relative)");
  sub->add_option("--drift-slope", f.drift_slope, "Linear background slope (relative, per us)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pdmr;
  CLI::App app{"Zero-field ODMR/PDMR simulator for spin-1 defects in 4H-SiC"};
  app.require_subcommand(1);
  Flags f;

  const std::map<std::string, ExperimentKind> kinds = {
      {"simulate-spectrum", ExperimentKind::Spectrum}, {"simulate-rabi", ExperimentKind::Rabi},
      {"fit-rabi", ExperimentKind::FitRabi},           {"rabi-power", ExperimentKind::RabiPower},
      {"two-freq", ExperimentKind::TwoFreq},           {"assign", ExperimentKind::Assign},
      {"power-sweep", ExperimentKind::PowerSweep}};

  auto* spectrum = app.add_subcommand("simulate-spectrum", "Pulsed ODMR/PDMR frequency sweep");
  add_common(spectrum, f);
  add_sweep(spectrum, f);
  spectrum->add_flag("--fit", f.fit, "Fit Lorentzian peaks");

  auto* rabi = app.add_subcommand("simulate-rabi", "Rabi pulse-duration sweep");
  add_common(rabi, f);
  add_rabi(rabi, f);
  rabi->add_flag("--fit", f.fit, "Decompose into damped cosines");

  auto* fit_rabi = app.add_subcommand("fit-rabi", "Decompose a measured Rabi trace (time_us,signal CSV)");
  add_common(fit_rabi, f);
  fit_rabi->add_option("--input", f.input, "Trace CSV")->required();
  fit_rabi->add_option("--n-max", f.n_max, "Largest component count tried");

  auto* rabi_power = app.add_subcommand("rabi-power", "Rabi decomposition vs MW power, sqrt(P) check");
  add_common(rabi_power, f);
  add_rabi(rabi_power, f);
  rabi_power->add_option("--mw-powers", f.mw_powers, "MW powers (default 8 over one decade)");

  auto* two_freq = app.add_subcommand("two-freq", "Two-frequency differential spectrum");
  add_common(two_freq, f);
  add_sweep(two_freq, f);
  two_freq->add_option("--f1", f.f1, "MW1 frequencies (MHz)");

  auto* assign = app.add_subcommand("assign", "Survey, two-frequency scans and transition pairing");
  add_common(assign, f);
  add_sweep(assign, f);

  auto* power = app.add_subcommand("power-sweep", "Per-species ODMR/PDMR signal vs laser power");
  add_common(power, f);
  power->add_option("--laser-powers", f.laser_powers, "Laser powers (default 21 over two decades)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto given = [&](const char* name) {
    const CLI::Option* o = sub->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  try {
    ExperimentConfig cfg;
    cfg.kind = kinds.at(sub->get_name());
    if (cfg.kind == ExperimentKind::TwoFreq || cfg.kind == ExperimentKind::Assign) cfg.channel = Channel::PDMR;
    if (given("--config")) {
      const ExperimentKind kind = cfg.kind;
      apply_config_file(f.config, cfg);
      if (cfg.kind != kind) {
        throw SchemaError(std::string("config kind '") + to_string(cfg.kind) + "' does not match subcommand " +
                          sub->get_name());
      }
    }
    if (given("--channel")) cfg.channel = channel_from_string(f.channel);
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--noise")) cfg.noise = f.noise;
    if (given("--laser-power")) cfg.laser_power = f.laser_power;
    if (given("--mw-power")) cfg.mw_power = f.mw_power;
    if (given("--fit")) cfg.fit = f.fit;
    if (given("--out-dir")) cfg.out_dir = f.out_dir;
    if (given("--f-start")) cfg.f_start_mhz = f.f_start;
    if (given("--f-stop")) cfg.f_stop_mhz = f.f_stop;
    if (given("--step")) cfg.step_mhz = f.step;
    if (given("--frequency")) cfg.rabi_frequency_mhz = f.frequency;
    if (given("--f1")) cfg.f1_mhz = f.f1;
    if (given("--t-max")) cfg.t_max_us = f.t_max;
    if (given("--dt")) cfg.dt_us = f.dt;
    if (given("--n-max")) cfg.n_max = f.n_max;
    if (given("--input")) cfg.input = f.input;
    if (given("--mw-powers")) cfg.mw_powers = f.mw_powers;
    if (given("--laser-powers")) cfg.laser_powers = f.laser_powers;
    if (given("--drift-intercept")) cfg.drift_intercept = f.drift_intercept;
    if (given("--drift-slope")) cfg.drift_slope_per_us = f.drift_slope;

    const Registry registry = given("--registry") ? load_registry_file(f.registry) : load_default_registry();
    return run_command(cfg, registry, std::cerr);
  } catch (const pdmr::FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

#include "pdmr/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "pdmr/charge_model.hpp"
#include "pdmr/classify.hpp"
#include "pdmr/output.hpp"
#include "pdmr/pairing.hpp"
#include "pdmr/registry_io.hpp"
#include "pdmr/sequence_engine.hpp"

namespace pdmr {

using nlohmann::json;

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#17becf"};

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metadata(const ExperimentConfig& cfg, const Registry& registry, double noise_sigma) {
  return {{"experiment", to_string(cfg.kind)},
          {"channel", to_string(cfg.channel)},
          {"seed", cfg.seed},
          {"laser_power", cfg.laser_power},
          {"mw_power", cfg.mw_power},
          {"noise_rel", cfg.noise.value_or(default_noise(cfg.kind))},
          {"noise_sigma", noise_sigma},
          {"provenance", provenance_report(registry)}};
}

std::string freq_tag(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", f);
  return buf;
}

Plot spectrum_plot(const Spectrum& s, const std::string& title) {
  Plot p;
  p.title = title;
  p.x_label = "frequency (MHz)";
  p.y_label = std::string(to_string(s.channel)) + " signal";
  p.series.push_back({s.freq_mhz, s.signal, kPalette[0], 1.2, false, ""});
  return p;
}

Plot rabi_plot(const RabiTrace& trace, const RabiComponentFit* fit, const std::string& title) {
  Plot p;
  p.title = title;
  p.x_label = "MW pulse duration (us)";
  p.y_label = "signal";
  p.series.push_back({trace.time_us, trace.signal, "#555555", 1.0, true, "data"});
  if (fit) {
    // Components are drawn about the fitted background so they overlay the data.
    for (std::size_t c = 0; c < fit->components.size(); ++c) {
      std::vector<double> y;
      for (double t : trace.time_us) y.push_back(fit->intercept + fit->slope * t + fit->evaluate_component(c, t));
      char label[48];
      std::snprintf(label, sizeof label, "%.3f MHz", fit->components[c].frequency_mhz);
      p.series.push_back({trace.time_us, y, kPalette[(c + 1) % 8], 0.7, false, label});
    }
    std::vector<double> y;
    for (double t : trace.time_us) y.push_back(fit->evaluate(t));
    p.series.push_back({trace.time_us, y, kPalette[0], 2.0, false, "fit N=" + std::to_string(fit->n())});
  }
  return p;
}

std::vector<double> duration_grid(const ExperimentConfig& cfg) {
  const auto n = static_cast<std::size_t>(std::floor(cfg.t_max_us / cfg.dt_us + 1e-9)) + 1;
  return uniform_grid(0.0, cfg.dt_us, n);
}

RabiSweepOptions rabi_options(const ExperimentConfig& cfg) {
  RabiSweepOptions o;
  o.decay_time_us = cfg.decay_time_us;
  o.noise_rel = cfg.noise.value_or(kDefaultRabiNoise);
  o.drift_intercept_rel = cfg.drift_intercept;
  o.drift_slope_rel_per_us = cfg.drift_slope_per_us;
  o.seed = cfg.seed;
  return o;
}

json fit_error_json(const FitError& e) {
  json best = json::array();
  for (double v : e.best_params()) best.push_back(finite_or_null(v));
  return {{"error", e.what()}, {"best_params", best}, {"residual_rms", finite_or_null(e.residual_rms())}};
}

}  // namespace

json peak_fit_json(const PeakFitResult& fit) {
  json peaks = json::array();
  for (const auto& p : fit.peaks) {
    peaks.push_back({{"center_mhz", p.center_mhz},
                     {"fwhm_mhz", p.fwhm_mhz},
                     {"amplitude", p.amplitude},
                     {"center_err", p.center_err},
                     {"fwhm_err", p.fwhm_err},
                     {"amplitude_err", p.amplitude_err}});
  }
  return {{"peaks", peaks},
          {"baseline", fit.baseline},
          {"baseline_err", fit.baseline_err},
          {"residual_rms", fit.residual_rms},
          {"iterations", fit.iterations}};
}

json rabi_fit_json(const RabiComponentFit& fit) {
  json comps = json::array();
  for (const auto& c : fit.components) {
    comps.push_back({{"frequency_mhz", c.frequency_mhz},
                     {"amplitude", c.amplitude},
                     {"decay_rate_per_us", c.decay_rate},
                     {"phase_rad", c.phase_rad},
                     {"frequency_err", c.frequency_err},
                     {"amplitude_err", c.amplitude_err},
                     {"decay_err", c.decay_err},
                     {"phase_err", c.phase_err}});
  }
  json scores = json::array();
  for (const auto& s : fit.scores) {
    scores.push_back({{"n", s.n},
                      {"aicc", finite_or_null(s.aicc)},
                      {"rss", finite_or_null(s.rss)},
                      {"failed", s.failed},
                      {"insignificant", s.insignificant}});
  }
  return {{"selected_n", fit.n()},
          {"components", comps},
          {"background", {{"intercept", fit.intercept}, {"slope_per_us", fit.slope}}},
          {"residual_rms", fit.residual_rms},
          {"aicc", finite_or_null(fit.aicc)},
          {"degenerate", fit.degenerate},
          {"scores", scores}};
}

int cmd_simulate_spectrum(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log) {
  prepare_out_dir(cfg.out_dir);
  const EngineSettings settings = cfg.engine_settings(registry);
  const Spectrum s = run_pulsed_spectrum(registry, cfg.channel, cfg.f_start_mhz, cfg.f_stop_mhz,
                                         cfg.step_mhz, cfg.mw_power, settings);
  write_spectrum_csv(cfg.out_dir / "spectrum.csv", s);
  write_svg(cfg.out_dir / "spectrum.svg",
            spectrum_plot(s, std::string("Pulsed ") + to_string(cfg.channel) + " spectrum"));
  if (!cfg.fit) return kExitOk;
  json report = metadata(cfg, registry, settings.noise_sigma);
  PeakDetectOptions detect;
  detect.fwhm_guess_mhz = cfg.linewidth_fwhm_mhz;
  try {
    report["fit"] = peak_fit_json(fit_peaks(s, std::nullopt, detect));
  } catch (const FitError& e) {
    report["fit"] = fit_error_json(e);
    write_json(cfg.out_dir / "spectrum_fit.json", report);
    log << "fit failed: " << e.what() << "\n";
    return kExitFit;
  }
  write_json(cfg.out_dir / "spectrum_fit.json", report);
  return kExitOk;
}

namespace {

int fit_and_report(const ExperimentConfig& cfg, const Registry& registry, const RabiTrace& trace,
                   const std::string& stem, std::ostream& log) {
  json report = metadata(cfg, registry, 0.0);
  report["drive_frequency_mhz"] = trace.drive_frequency_mhz;
  try {
    const RabiComponentFit fit = select_components(trace, cfg.n_max);
    report["fit"] = rabi_fit_json(fit);
    write_json(cfg.out_dir / (stem + ".json"), report);
    write_svg(cfg.out_dir / (stem + ".svg"), rabi_plot(trace, &fit, "Rabi decomposition"));
  } catch (const FitError& e) {
    report["fit"] = fit_error_json(e);
    write_json(cfg.out_dir / (stem + ".json"), report);
    log << "fit failed: " << e.what() << "\n";
    return kExitFit;
  }
  return kExitOk;
}

}  // namespace

int cmd_simulate_rabi(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log) {
  prepare_out_dir(cfg.out_dir);
  const EngineSettings settings = cfg.engine_settings(registry);
  const RabiTrace trace = run_rabi_sweep(registry, cfg.rabi_frequency_mhz, duration_grid(cfg),
                                         cfg.mw_power, cfg.channel, settings, rabi_options(cfg));
  write_trace_csv(cfg.out_dir / "rabi.csv", trace);
  write_svg(cfg.out_dir / "rabi.svg", rabi_plot(trace, nullptr, "Rabi oscillation"));
  if (!cfg.fit) return kExitOk;
  return fit_and_report(cfg, registry, trace, "rabi_fit", log);
}

int cmd_fit_rabi(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log) {
  if (cfg.input.empty()) throw SchemaError("fit-rabi: an input CSV is required");
  const RabiTrace trace = read_trace_csv(cfg.input);
  prepare_out_dir(cfg.out_dir);
  return fit_and_report(cfg, registry, trace, "rabi_fit", log);
}

int cmd_rabi_power(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log) {
  prepare_out_dir(cfg.out_dir);
  const EngineSettings settings = cfg.engine_settings(registry);
  const std::vector<double> powers = cfg.mw_powers.empty() ? log_grid(1.0, 10.0, 8) : cfg.mw_powers;
  const auto durations = duration_grid(cfg);
  json report = metadata(cfg, registry, 0.0);
  report["drive_frequency_mhz"] = cfg.rabi_frequency_mhz;
  json fits = json::array();
  std::vector<PowerPoint> series;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    RabiSweepOptions opt = rabi_options(cfg);
    opt.seed = cfg.seed + 7919ULL * i;
    const RabiTrace trace = run_rabi_sweep(registry, cfg.rabi_frequency_mhz, durations, powers[i],
                                           cfg.channel, settings, opt);
    write_trace_csv(cfg.out_dir / ("rabi_power_" + std::to_string(i) + ".csv"), trace);
    try {
      RabiComponentFit fit = select_components(trace, cfg.n_max);
      fits.push_back({{"mw_power", powers[i]}, {"fit", rabi_fit_json(fit)}});
      series.push_back({powers[i], std::move(fit)});
    } catch (const FitError& e) {
      report["fits"] = fits;
      report["error"] = fit_error_json(e);
      write_json(cfg.out_dir / "rabi_power.json", report);
      log << "fit failed at MW power " << powers[i] << ": " << e.what() << "\n";
      return kExitFit;
    }
  }
  report["fits"] = fits;
  if (series.size() >= 3) {
    const Classification c = classify_transition(series);
    json exps = json::array();
    for (const auto& e : c.exponents) {
      exps.push_back({{"exponent", e.exponent}, {"exponent_err", e.exponent_err}, {"prefactor", e.prefactor}});
    }
    json per_point = json::array();
    for (auto a : c.per_point) per_point.push_back(to_string(a));
    report["exponents"] = exps;
    report["classification"] = {{"verdict", to_string(c.verdict)}, {"per_point", per_point}, {"reason", c.reason}};
  }
  write_json(cfg.out_dir / "rabi_power.json", report);

  Plot p;
  p.title = "Rabi frequency vs MW power";
  p.x_label = "MW power (arb.)";
  p.y_label = "Rabi frequency (MHz)";
  p.log_x = p.log_y = true;
  const std::size_t n = series.empty() ? 0 : series.front().fit.components.size();
  for (std::size_t k = 0; k < n; ++k) {
    PlotSeries s;
    s.color = kPalette[k % 8];
    s.markers = true;
    for (const auto& pt : series) {
      if (pt.fit.components.size() != n) continue;
      s.x.push_back(pt.mw_power);
      s.y.push_back(pt.fit.components[k].frequency_mhz);
    }
    p.series.push_back(s);
  }
  write_svg(cfg.out_dir / "rabi_power.svg", p);
  return kExitOk;
}

int cmd_two_freq(const ExperimentConfig& cfg, const Registry& registry, std::ostream&) {
  prepare_out_dir(cfg.out_dir);
  if (cfg.f1_mhz.empty()) throw SchemaError("two-freq: at least one f1 is required");
  for (std::size_t i = 0; i < cfg.f1_mhz.size(); ++i) {
    EngineSettings s = cfg.engine_settings(registry);
    s.seed = cfg.seed + 1000003ULL * (i + 1);
    const Spectrum d = run_two_frequency(registry, cfg.f1_mhz[i], cfg.f_start_mhz, cfg.f_stop_mhz,
                                         cfg.step_mhz, cfg.mw_power, cfg.channel, s);
    const std::string stem = "two_freq_" + freq_tag(cfg.f1_mhz[i]);
    write_spectrum_csv(cfg.out_dir / (stem + ".csv"), d);
    write_svg(cfg.out_dir / (stem + ".svg"),
              spectrum_plot(d, "Two-frequency " + std::string(to_string(cfg.channel)) + ", f1 = " +
                                   freq_tag(cfg.f1_mhz[i]) + " MHz"));
  }
  return kExitOk;
}

int cmd_assign(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log) {
  prepare_out_dir(cfg.out_dir);
  const EngineSettings settings = cfg.engine_settings(registry);
  AssignmentOptions opt;
  opt.channel = cfg.channel;
  opt.f_start_mhz = cfg.f_start_mhz;
  opt.f_stop_mhz = cfg.f_stop_mhz;
  opt.step_mhz = cfg.step_mhz;
  opt.mw_power = cfg.mw_power;
  AssignmentReport rep;
  try {
    rep = run_assignment(registry, settings, opt);
  } catch (const FitError& e) {
    json report = metadata(cfg, registry, settings.noise_sigma);
    report["error"] = fit_error_json(e);
    write_json(cfg.out_dir / "assignment.json", report);
    log << "survey fit failed: " << e.what() << "\n";
    return kExitFit;
  }

  write_spectrum_csv(cfg.out_dir / "survey.csv", rep.survey);
  write_svg(cfg.out_dir / "survey.svg", spectrum_plot(rep.survey, "Survey spectrum"));
  json survey = metadata(cfg, registry, settings.noise_sigma);
  survey["fit"] = peak_fit_json(rep.peaks);
  write_json(cfg.out_dir / "survey_fit.json", survey);
  for (std::size_t i = 0; i < rep.differential.size(); ++i) {
    const std::string stem = "two_freq_" + freq_tag(rep.matrix.lines_mhz[i]);
    write_spectrum_csv(cfg.out_dir / (stem + ".csv"), rep.differential[i]);
    write_svg(cfg.out_dir / (stem + ".svg"),
              spectrum_plot(rep.differential[i], "Two-frequency, f1 = " + freq_tag(rep.matrix.lines_mhz[i]) + " MHz"));
  }

  json matrix = metadata(cfg, registry, settings.noise_sigma);
  matrix["lines_mhz"] = rep.matrix.lines_mhz;
  json rows = json::array();
  for (Eigen::Index i = 0; i < rep.matrix.response.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < rep.matrix.response.cols(); ++j) row.push_back(rep.matrix.response(i, j));
    rows.push_back(row);
  }
  matrix["response"] = rows;
  json noise = json::array();
  for (Eigen::Index i = 0; i < rep.matrix.noise.size(); ++i) noise.push_back(rep.matrix.noise(i));
  matrix["noise"] = noise;
  write_json(cfg.out_dir / "response_matrix.json", matrix);

  json report = metadata(cfg, registry, settings.noise_sigma);
  if (!rep.conflicts.empty()) {
    json table = json::array();
    for (const auto& c : rep.conflicts) table.push_back({{"line_mhz", c.line_mhz}, {"partners_mhz", c.partners_mhz}});
    report["status"] = "ambiguous";
    report["conflicts"] = table;
    write_json(cfg.out_dir / "assignment.json", report);
    log << "assignment ambiguous: " << rep.conflicts.size() << " conflicting line(s)\n";
    return kExitAmbiguity;
  }
  json pairs = json::array();
  for (const auto& p : rep.pairing->pairs) {
    std::string zfs_prov = "derived";
    for (const auto& s : registry) {
      if (s.name == p.label) zfs_prov = std::string("derived; registry ") + to_string(s.provenance.zfs);
    }
    pairs.push_back({{"f_lo_mhz", p.f_lo},
                     {"f_hi_mhz", p.f_hi},
                     {"d_mhz", p.zfs.d_mhz()},
                     {"e_mhz", p.zfs.e_mhz()},
                     {"label", p.label},
                     {"provenance", zfs_prov},
                     {"response_lo_to_hi", p.response_lo_to_hi},
                     {"response_hi_to_lo", p.response_hi_to_lo}});
  }
  report["status"] = "ok";
  report["pairs"] = pairs;
  report["unpaired_mhz"] = rep.pairing->unpaired;
  write_json(cfg.out_dir / "assignment.json", report);
  return kExitOk;
}

SignalPowerSweep laser_power_sweep(const Registry& registry, const std::vector<double>& powers,
                                   const ReadoutConditions& base) {
  SignalPowerSweep out;
  out.laser_power = powers;
  for (const auto& s : registry) {
    std::vector<double> o, p;
    for (double pw : powers) {
      ReadoutConditions rc = base;
      rc.laser_power = pw;
      o.push_back(std::abs(full_inversion_signal(s, Channel::ODMR, rc)));
      p.push_back(std::abs(full_inversion_signal(s, Channel::PDMR, rc)));
    }
    out.odmr.push_back(o);
    out.pdmr.push_back(p);
  }
  return out;
}

double top_decade_slope(const std::vector<double>& powers, const std::vector<double>& values) {
  const double top = *std::max_element(powers.begin(), powers.end());
  std::vector<double> p, v;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (powers[i] >= top / 10.0 * (1.0 - 1e-12)) {
      p.push_back(powers[i]);
      v.push_back(values[i]);
    }
  }
  return fit_power_law(p, v).exponent;
}

int cmd_power_sweep(const ExperimentConfig& cfg, const Registry& registry, std::ostream&) {
  prepare_out_dir(cfg.out_dir);
  const std::vector<double> powers = cfg.laser_powers.empty() ? log_grid(1.0, 100.0, 21) : cfg.laser_powers;
  ReadoutConditions rc;
  const SignalPowerSweep sw = laser_power_sweep(registry, powers, rc);

  std::string csv = "laser_power,species,channel,signal\n";
  for (std::size_t k = 0; k < registry.size(); ++k) {
    for (int ch = 0; ch < 2; ++ch) {
      const auto& v = ch == 0 ? sw.odmr[k] : sw.pdmr[k];
      for (std::size_t i = 0; i < powers.size(); ++i) {
        csv += format_number(powers[i]) + "," + registry[k].name + "," + (ch == 0 ? "ODMR" : "PDMR") +
               "," + format_number(v[i]) + "\n";
      }
    }
  }
  write_text(cfg.out_dir / "power_sweep.csv", csv);

  json report = metadata(cfg, registry, 0.0);
  report["laser_powers"] = powers;
  json species = json::object();
  for (std::size_t k = 0; k < registry.size(); ++k) {
    json entry;
    for (int ch = 0; ch < 2; ++ch) {
      const auto& v = ch == 0 ? sw.odmr[k] : sw.pdmr[k];
      const bool visible = std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
      entry[ch == 0 ? "odmr" : "pdmr"] = {
          {"top_decade_slope", visible && powers.size() >= 2 ? json(top_decade_slope(powers, v)) : json(nullptr)},
          {"signal_at_max_power", v.back()},
          {"visible", visible}};
    }
    species[registry[k].name] = entry;
  }
  report["species"] = species;
  for (int ch = 0; ch < 2; ++ch) {
    const auto& m = ch == 0 ? sw.odmr : sw.pdmr;
    std::vector<std::size_t> idx(registry.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return m[a].back() > m[b].back(); });
    json order = json::array();
    for (std::size_t i : idx) {
      if (m[i].back() > 0.0) order.push_back(registry[i].name);
    }
    report[ch == 0 ? "odmr_order_at_max_power" : "pdmr_order_at_max_power"] = order;

    Plot p;
    p.title = std::string(ch == 0 ? "ODMR" : "PDMR") + " signal vs laser power";
    p.x_label = "laser power (arb.)";
    p.y_label = "|signal|";
    p.log_x = p.log_y = true;
    for (std::size_t k = 0; k < registry.size(); ++k) {
      PlotSeries s{powers, m[k], kPalette[k % 8], 1.5, false, registry[k].name};
      p.series.push_back(s);
    }
    write_svg(cfg.out_dir / (ch == 0 ? "power_sweep_odmr.svg" : "power_sweep_pdmr.svg"), p);
  }
  write_json(cfg.out_dir / "power_sweep.json", report);
  return kExitOk;
}

int run_command(const ExperimentConfig& cfg, const Registry& registry, std::ostream& log) {
  cfg.validate();
  switch (cfg.kind) {
    case ExperimentKind::Spectrum: return cmd_simulate_spectrum(cfg, registry, log);
    case ExperimentKind::Rabi: return cmd_simulate_rabi(cfg, registry, log);
    case ExperimentKind::FitRabi: return cmd_fit_rabi(cfg, registry, log);
    case ExperimentKind::RabiPower: return cmd_rabi_power(cfg, registry, log);
    case ExperimentKind::TwoFreq: return cmd_two_freq(cfg, registry, log);
    case ExperimentKind::Assign: return cmd_assign(cfg, registry, log);
    case ExperimentKind::PowerSweep: return cmd_power_sweep(cfg, registry, log);
  }
  return kExitUsage;
}

}  // namespace pdmr

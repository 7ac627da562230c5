#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pdmr/peaks.hpp"
#include "pdmr/registry_io.hpp"
#include "pdmr/sequence_engine.hpp"

using namespace pdmr;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double window_sum(const Spectrum& s, double center, double half) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.freq_mhz.size(); ++i)
    if (std::abs(s.freq_mhz[i] - center) <= half) acc += std::abs(s.signal[i]);
  return acc;
}

DefectSpecies& find(Registry& r, const std::string& name) {
  for (auto& s : r)
    if (s.name == name) return s;
  throw std::runtime_error("missing " + name);
}

}  // namespace

TEST_CASE("sequence validation") {
  auto seq = PulseSequence::pulsed(1332.6, 1.0);
  CHECK_NOTHROW(seq.validate());
  auto bad = seq;
  bad.segments.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = seq;
  bad.modulation->target_tone = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = seq;
  bad.segments.front().duration_us = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_NOTHROW(PulseSequence::two_frequency(1332.6, 1134.6, 1.0).validate());
}

TEST_CASE("square-wave demodulation") {
  CHECK(envelope_on(0, 2));
  CHECK_FALSE(envelope_on(1, 2));
  CHECK(envelope_on(1, 4));
  CHECK_FALSE(envelope_on(2, 4));
  CHECK(demodulate_square({3.0, 1.0, 3.0, 1.0}, 2) == 2.0);
  CHECK(demodulate_square({5.0, 5.0, 5.0, 5.0}, 2) == 0.0);
  CHECK_THROWS_AS(demodulate_square({1.0, 2.0, 3.0}, 2), std::invalid_argument);
}

TEST_CASE("lineshape") {
  EngineSettings s;
  CHECK(addressed_lineshape(0.0, s) == 1.0);
  CHECK(addressed_lineshape(1.0, s) == doctest::Approx(0.5));
  CHECK(addressed_lineshape(8.0, s) > 0.0);
  CHECK(addressed_lineshape(8.01, s) == 0.0);
  s.linewidth_fwhm_mhz = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("empty registry gives a flat spectrum") {
  EngineSettings s;
  const auto sp = run_pulsed_spectrum({}, Channel::ODMR, 1100.0, 1400.0, 1.0, 1.0, s);
  CHECK(max_abs(sp.signal) == 0.0);
}

TEST_CASE("lock-in linearity in species weights") {
  Registry reg = load_default_registry();
  EngineSettings s;
  const auto a = run_pulsed_spectrum(reg, Channel::ODMR, 1120.0, 1390.0, 0.5, 1.0, s);
  for (auto& sp : reg) sp.weight *= 3.5;
  const auto b = run_pulsed_spectrum(reg, Channel::ODMR, 1120.0, 1390.0, 0.5, 1.0, s);
  const double scale = max_abs(a.signal);
  for (std::size_t i = 0; i < a.signal.size(); ++i)
    CHECK(std::abs(b.signal[i] - 3.5 * a.signal[i]) <= 1e-12 * scale);
}

TEST_CASE("baseline closure with the MW amplitude at zero") {
  const Registry reg = load_default_registry();
  EngineSettings s;
  s.noise_sigma = 0.01;
  s.seed = 11;
  const auto sp = run_pulsed_spectrum(reg, Channel::ODMR, 1100.0, 1400.0, 0.2, 0.0, s);
  const double n = static_cast<double>(sp.signal.size());
  const double mean = std::accumulate(sp.signal.begin(), sp.signal.end(), 0.0) / n;
  CHECK(std::abs(mean) < 3.0 * s.noise_sigma / std::sqrt(n));
  double var = 0.0;
  for (double v : sp.signal) var += (v - mean) * (v - mean);
  CHECK(std::sqrt(var / (n - 1)) == doctest::Approx(s.noise_sigma).epsilon(0.1));
}

TEST_CASE("spectra are reproducible per seed") {
  const Registry reg = load_default_registry();
  EngineSettings s;
  s.noise_sigma = 0.01;
  s.seed = 5;
  const auto a = run_pulsed_spectrum(reg, Channel::PDMR, 1300.0, 1360.0, 0.2, 1.0, s);
  const auto b = run_pulsed_spectrum(reg, Channel::PDMR, 1300.0, 1360.0, 0.2, 1.0, s);
  CHECK(a.signal == b.signal);
}

TEST_CASE("two-frequency selectivity") {
  const Registry reg = load_default_registry();
  EngineSettings s;
  const auto d = run_two_frequency(reg, 1332.6, 1100.0, 1400.0, 0.2, 1.0, Channel::PDMR, s);
  const double peak = max_abs(d.signal);
  CHECK(peak > 0.0);
  // PL7's partner line answers; lines of unaddressed species are exactly silent
  // (the windows stay clear of the addressed line's own 8 MHz skirt).
  CHECK(window_sum(d, 1134.6, 1.0) > 0.0);
  for (double f : {1277.4, 1291.8, 1321.9, 1342.1, 1350.9, 1374.9})
    CHECK(window_sum(d, f, 1.0) == 0.0);

  const auto far = run_two_frequency(reg, 1200.0, 1100.0, 1400.0, 0.5, 1.0, Channel::PDMR, s);
  CHECK(max_abs(far.signal) == 0.0);

  // The axial species has no partner: response only where f2 addresses it again.
  const auto pl6 = run_two_frequency(reg, 1350.9, 1100.0, 1400.0, 0.2, 1.0, Channel::PDMR, s);
  for (std::size_t i = 0; i < pl6.freq_mhz.size(); ++i)
    if (std::abs(pl6.freq_mhz[i] - 1350.9) > 8.0 && std::abs(pl6.freq_mhz[i] - 1342.1) > 8.0 &&
        std::abs(pl6.freq_mhz[i] - 1358.5) > 9.0)
      CHECK(pl6.signal[i] == 0.0);
  CHECK(window_sum(pl6, 1350.9, 1.0) > 0.0);
}

TEST_CASE("PDMR gate is the only cause of the missing NV line") {
  Registry reg = load_default_registry();
  EngineSettings s;
  s.noise_sigma = 0.002;
  const auto gated = run_pulsed_spectrum(reg, Channel::PDMR, 1300.0, 1340.0, 0.2, 1.0, s);
  CHECK(window_sum(gated, 1321.9, 3.0) / 31.0 < 3.0 * s.noise_sigma);

  auto& nv = find(reg, "PLX1");
  nv.thresholds.ionization_ev = 1.0;
  nv.thresholds.recovery_ev = 1.0;
  const auto open = run_pulsed_spectrum(reg, Channel::PDMR, 1300.0, 1340.0, 0.2, 1.0, s);
  const auto fit = fit_peaks(open);
  bool found = false;
  for (const auto& p : fit.peaks)
    if (std::abs(p.center_mhz - 1321.9) < 0.5 && std::abs(p.amplitude) > 5.0 * s.noise_sigma)
      found = true;
  CHECK(found);
}

TEST_CASE("rabi sweep matching") {
  const Registry reg = load_default_registry();
  EngineSettings s;
  const auto t = uniform_grid(0.0, 0.02, 100);
  CHECK_THROWS_AS(run_rabi_sweep(reg, 1200.0, t, 1.0, Channel::ODMR, s), NoMatchingTransition);
  const auto tr = run_rabi_sweep(reg, 1374.9, t, 1.0, Channel::ODMR, s);
  CHECK_NOTHROW(tr.validate());
  CHECK(tr.mw_power == 1.0);
  CHECK(tr.signal.front() == doctest::Approx(0.0));
  CHECK(max_abs(tr.signal) > 0.0);
}

TEST_CASE("field scales with sqrt of MW power") {
  EngineSettings s;
  CHECK(s.field_at(4.0).b1_mhz() == doctest::Approx(2.0 * s.field_at(1.0).b1_mhz()));
  CHECK(s.field_at(0.0).b1_mhz() == 0.0);
}

TEST_CASE("frequency grid") {
  const auto g = frequency_grid(1100.0, 1400.0, 0.2);
  CHECK(g.size() == 1501);
  CHECK(g.back() == doctest::Approx(1400.0));
  CHECK_THROWS_AS(frequency_grid(1400.0, 1100.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(frequency_grid(1100.0, 1400.0, 0.0), std::invalid_argument);
}

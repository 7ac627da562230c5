#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pdmr/dynamics.hpp"

using namespace pdmr;

namespace {

DefectSpecies basal(const char* name, double d, double e) {
  DefectSpecies s;
  s.name = name;
  s.zfs = ZfsParams(d, e);
  s.thresholds = {1.1, 1.0, 1.3};
  return s;
}

}  // namespace

TEST_CASE("rabi_rwa closed form") {
  CHECK(rabi_rwa(2.0, 0.0, 0.25) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(rabi_rwa(2.0, 0.0, 0.25)) < 1e-15);
  CHECK(rabi_rwa(2.0, 0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  const double s = std::sin(std::numbers::pi * std::sqrt(2.0) * 0.25);
  CHECK(rabi_rwa(1.0, 1.0, 0.25) == doctest::Approx(1.0 - 0.5 * s * s).epsilon(1e-15));
  CHECK(rabi_rwa(1.0, 1.0, 0.25) == doctest::Approx(0.598575).epsilon(1e-6));
  CHECK_THROWS_AS(rabi_rwa(-1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("undriven spin stays in |0>") {
  DriveParams d;
  d.frequency_mhz = 1332.6;
  const auto tr = propagate_full(ZfsParams(1233.6, 99.0), d, 0.2, 1e-5);
  for (const auto& p : tr.populations) CHECK(std::abs(p.p0 - 1.0) < 1e-12);
}

TEST_CASE("step size precondition") {
  DriveParams d;
  d.frequency_mhz = 1000.0;
  d.omega_x = 1.0;
  CHECK_THROWS_AS(propagate_full(ZfsParams(900.0, 100.0), d, 1.0, 1.0 / 19000.0), StepSizeError);
  CHECK_NOTHROW(propagate_full(ZfsParams(900.0, 100.0), d, 0.01, 1.0 / 20000.0));
  d.frequency_mhz = 0.0;
  CHECK_THROWS_AS(propagate_full(ZfsParams(900.0, 100.0), d, 0.01, 1e-5), std::invalid_argument);
}

TEST_CASE("full propagator against the RWA oracle") {
  // Coupling / carrier = 1e-3, ten Rabi periods.
  const ZfsParams zfs(1233.6, 99.0);
  for (Transition t : {Transition::Plus, Transition::Minus}) {
    DriveParams d;
    d.frequency_mhz = transition_frequency(zfs, t);
    const double omega = 1e-3 * d.frequency_mhz;
    (t == Transition::Plus ? d.omega_x : d.omega_y) = omega;
    const double dt = 1.0 / (20.0 * d.frequency_mhz);
    const auto tr = propagate_full(zfs, d, 10.0 / omega, dt, Stepper::Magnus4, 20);
    double worst = 0.0, unit = 0.0;
    for (std::size_t i = 0; i < tr.time_us.size(); ++i) {
      const auto& p = tr.populations[i];
      worst = std::max(worst, std::abs(p.p0 - rabi_rwa(omega, 0.0, tr.time_us[i])));
      unit = std::max(unit, std::abs(p.total() - 1.0));
    }
    CHECK(worst <= 1e-3);
    CHECK(unit <= 1e-10);
  }
}

TEST_CASE("detuned RWA cross-checked by the full propagator") {
  const ZfsParams zfs(1233.6, 99.0);
  DriveParams d;
  d.frequency_mhz = 1332.6 + 1.0;
  d.omega_x = 1.0;
  const auto tr = propagate_full(zfs, d, 0.25, 1.0 / (20.0 * d.frequency_mhz));
  CHECK(std::abs(tr.populations.back().p0 - rabi_rwa(1.0, 1.0, 0.25)) < 1e-3);
}

TEST_CASE("off-resonant drive is suppressed") {
  const ZfsParams zfs(1233.6, 99.0);
  DriveParams d;
  d.frequency_mhz = 1332.6 + 20.0;
  d.omega_x = 1.0;
  const auto tr = propagate_full(zfs, d, 2.0, 1.0 / (20.0 * d.frequency_mhz), Stepper::Magnus4, 10);
  double transfer = 0.0;
  for (const auto& p : tr.populations) transfer = std::max(transfer, 1.0 - p.p0);
  CHECK(transfer < 10.0 * (1.0 / 20.0) * (1.0 / 20.0));
}

TEST_CASE("midpoint stepper remains unitary") {
  DriveParams d;
  d.frequency_mhz = 1134.6;
  d.omega_y = 3.0;
  const auto tr = propagate_full(ZfsParams(1233.6, 99.0), d, 0.5, 1.0 / (40.0 * 1134.6),
                                 Stepper::Midpoint);
  for (const auto& p : tr.populations) CHECK(std::abs(p.total() - 1.0) <= 1e-10);
}

TEST_CASE("ensemble line structure") {
  const auto s = basal("B", 1233.6, 99.0);
  const MwField f = MwField::tilted(5.0);
  const auto x = ensemble_rabi_lines(s, f, Transition::Plus);
  REQUIRE(x.size() == 3);
  CHECK(std::abs((x[2].frequency_mhz - x[1].frequency_mhz) -
                 (x[1].frequency_mhz - x[0].frequency_mhz)) <= 1e-9 * x[2].frequency_mhz);
  for (const auto& l : x) CHECK(l.weight == doctest::Approx(1.0 / 3.0));
  const auto y = ensemble_rabi_lines(s, f, Transition::Minus);
  REQUIRE(y.size() == 2);
  CHECK(std::abs(y[1].frequency_mhz / y[0].frequency_mhz - 2.0) <= 1e-9);
  CHECK(y[0].weight == doctest::Approx(4.0 / 6.0));
  CHECK(y[1].weight == doctest::Approx(2.0 / 6.0));

  const auto x2 = ensemble_rabi_lines(s, f.scaled(2.0), Transition::Plus);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(x2[i].frequency_mhz == doctest::Approx(2.0 * x[i].frequency_mhz).epsilon(1e-14));

  DefectSpecies ax = s;
  ax.zfs = ZfsParams(1350.9, 0.0);
  ax.orientation = OrientationClass::Axial;
  const auto a = ensemble_rabi_lines(ax, f, Transition::Plus);
  REQUIRE(a.size() == 1);
  CHECK(a[0].frequency_mhz == doctest::Approx(5.0 * std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("noiseless ensemble trace is the weighted cosine sum") {
  const auto s = basal("B", 1358.5, 16.4);
  const MwField f = MwField::tilted(5.0);
  const auto t = uniform_grid(0.0, 0.02, 200);
  EnsembleRabiOptions o;
  o.decay_time_us = 0.0;
  const auto tr = simulate_ensemble_rabi(s, f, Transition::Minus, t, o);
  CHECK_NOTHROW(tr.validate());
  const auto lines = ensemble_rabi_lines(s, f, Transition::Minus);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double expect = 0.5;
    for (const auto& l : lines)
      expect += 0.5 * l.weight * std::cos(2.0 * std::numbers::pi * l.frequency_mhz * t[i]);
    CHECK(tr.signal[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("seeded noise is deterministic") {
  const auto s = basal("B", 1233.6, 99.0);
  const auto t = uniform_grid(0.0, 0.02, 100);
  EnsembleRabiOptions o;
  o.noise_sigma = 0.02;
  o.seed = 42;
  const auto a = simulate_ensemble_rabi(s, MwField::tilted(5.0), Transition::Plus, t, o);
  const auto b = simulate_ensemble_rabi(s, MwField::tilted(5.0), Transition::Plus, t, o);
  CHECK(a.signal == b.signal);
  o.seed = 43;
  const auto c = simulate_ensemble_rabi(s, MwField::tilted(5.0), Transition::Plus, t, o);
  CHECK(a.signal != c.signal);
}

TEST_CASE("trace validation") {
  RabiTrace tr;
  tr.time_us = {0.0, 0.1, 0.3};
  tr.signal = {1.0, 0.5, 0.2};
  CHECK_THROWS_AS(tr.validate(), std::invalid_argument);
  tr.time_us = {0.0, 0.1, 0.2};
  tr.signal = {1.0, std::nan(""), 0.2};
  CHECK_THROWS_AS(tr.validate(), std::invalid_argument);
  tr.signal = {1.0, 0.5};
  CHECK_THROWS_AS(tr.validate(), std::invalid_argument);
}

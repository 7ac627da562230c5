#include <doctest.h>

#include <cmath>

#include "pdmr/charge_model.hpp"
#include "pdmr/classify.hpp"
#include "pdmr/registry_io.hpp"

using namespace pdmr;

namespace {

const DefectSpecies& find(const Registry& r, const std::string& name) {
  for (const auto& s : r)
    if (s.name == name) return s;
  throw std::runtime_error("missing " + name);
}

}  // namespace

TEST_CASE("stationary solution satisfies the rate equations") {
  const Registry reg = load_default_registry();
  for (const auto& s : reg) {
    for (double p : {0.01, 1.0, 10.0, 100.0}) {
      const auto r = PhotoCycleRates::at_power(s.photophysics, p);
      for (SpinMode m : {SpinMode::Free, SpinMode::Ms0, SpinMode::Ms1}) {
        const auto st = solve_steady_state(r, m);
        Eigen::Matrix<double, kLevelCount, 1> n;
        double sum = 0.0;
        for (int i = 0; i < kLevelCount; ++i) {
          n(i) = st.occupation[static_cast<std::size_t>(i)];
          CHECK(n(i) >= 0.0);
          sum += n(i);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        const double scale = rate_matrix(r, m).cwiseAbs().maxCoeff();
        CHECK((rate_matrix(r, m) * n).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, scale));
      }
    }
  }
}

TEST_CASE("dark limit") {
  Photophysics ph;
  ph.pump_per_power = 0.0;
  const auto st = solve_steady_state(PhotoCycleRates::at_power(ph, 10.0), SpinMode::Free);
  CHECK(st.pl_rate == 0.0);
  CHECK(st.current_rate == 0.0);
}

TEST_CASE("singular system is reported") {
  Photophysics ph;
  ph.recovery_per_power = 0.0;
  CHECK_THROWS_AS(solve_steady_state(PhotoCycleRates::at_power(ph, 10.0), SpinMode::Free),
                  SingularRateSystem);
}

TEST_CASE("rates validation") {
  Photophysics ph;
  ph.k_isc1 = ph.k_isc0;
  CHECK_THROWS_AS(PhotoCycleRates::at_power(ph, 1.0).validate(), std::invalid_argument);
  ph = Photophysics{};
  ph.k_rad = -1.0;
  CHECK_THROWS_AS(PhotoCycleRates::at_power(ph, 1.0).validate(), std::invalid_argument);
}

TEST_CASE("power-law limits") {
  const Photophysics ph;
  std::vector<double> lo, cur, pl;
  for (double p = 0.001; p <= 0.01 * (1.0 + 1e-9); p *= std::pow(10.0, 0.1)) {
    const auto st = solve_steady_state(PhotoCycleRates::at_power(ph, p), SpinMode::Free);
    lo.push_back(p);
    cur.push_back(st.current_rate);
    pl.push_back(st.pl_rate);
  }
  CHECK(fit_power_law(lo, cur).exponent == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit_power_law(lo, pl).exponent == doctest::Approx(1.0).epsilon(0.05));

  std::vector<double> hi, pl_hi, cur_hi;
  for (double p = 100.0; p <= 1000.0 * (1.0 + 1e-9); p *= std::pow(10.0, 0.1)) {
    const auto st = solve_steady_state(PhotoCycleRates::at_power(ph, p), SpinMode::Free);
    hi.push_back(p);
    pl_hi.push_back(st.pl_rate);
    cur_hi.push_back(st.current_rate);
  }
  CHECK(fit_power_law(hi, pl_hi).exponent <= 0.1);
  CHECK(fit_power_law(hi, cur_hi).exponent > 0.5);
}

TEST_CASE("current is nondecreasing in laser power") {
  for (const auto& s : load_default_registry()) {
    double prev = -1.0;
    for (double p = 0.01; p < 1000.0; p *= 1.2) {
      const double c = solve_steady_state(PhotoCycleRates::at_power(s.photophysics, p),
                                          SpinMode::Free).current_rate;
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("ms = 0 is brighter") {
  const auto r = PhotoCycleRates::at_power(Photophysics{}, 10.0);
  CHECK(steady_state(r, 1.0).pl_rate > steady_state(r, 0.0).pl_rate);
  CHECK(polarized_ms0_fraction(r) > 1.0 / 3.0);
  CHECK(polarized_ms0_fraction(r) < 1.0);
}

TEST_CASE("spin-frozen mixture") {
  const auto r = PhotoCycleRates::at_power(Photophysics{}, 5.0);
  const auto a = steady_state(r, 0.0), b = steady_state(r, 1.0), m = steady_state(r, 0.3);
  CHECK(m.pl_rate == doctest::Approx(0.3 * b.pl_rate + 0.7 * a.pl_rate).epsilon(1e-12));
  CHECK(m.current_rate == doctest::Approx(0.3 * b.current_rate + 0.7 * a.current_rate).epsilon(1e-12));
  CHECK_THROWS_AS(steady_state(r, 1.5), std::invalid_argument);
}

TEST_CASE("transfer bookkeeping") {
  CHECK(ms0_after_transfer(0.8, 0.0) == 0.8);
  // Full transfer to one of the two ms=+-1 states: ms0 takes that state's share.
  CHECK(ms0_after_transfer(0.8, 1.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(ms0_after_transfer(0.8, 0.5) == doctest::Approx(0.45).epsilon(1e-15));
}

TEST_CASE("readout signal") {
  const Registry reg = load_default_registry();
  const ReadoutConditions rc;
  for (const auto& s : reg) {
    const double p_ref = polarized_ms0_fraction(PhotoCycleRates::at_power(s.photophysics, rc.laser_power));
    CHECK(readout_signal(s, p_ref, Channel::ODMR, rc) == 0.0);
    CHECK(readout_signal(s, p_ref, Channel::PDMR, rc) == 0.0);
    double prev = 0.0;
    for (double q = 0.1; q <= 1.0 + 1e-12; q += 0.1) {
      const double v = std::abs(readout_signal(s, ms0_after_transfer(p_ref, q), Channel::ODMR, rc));
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(std::abs(full_inversion_signal(s, Channel::ODMR, rc)) == doctest::Approx(prev));
  }
  // Ordinary lines dim the PL on resonance; the minor features have opposite sign.
  CHECK(full_inversion_signal(find(reg, "PL6"), Channel::ODMR, rc) < 0.0);
  CHECK(full_inversion_signal(find(reg, "M1291"), Channel::ODMR, rc) > 0.0);
}

TEST_CASE("PDMR visibility gate") {
  const Registry reg = load_default_registry();
  const double e905 = 1239.841984 / 905.0;
  CHECK(e905 == doctest::Approx(1.370).epsilon(1e-3));
  CHECK(pdmr_visible(find(reg, "PL3"), e905));
  CHECK(pdmr_visible(find(reg, "PL7"), e905));
  CHECK_FALSE(pdmr_visible(find(reg, "PLX1"), e905));
  CHECK_FALSE(pdmr_visible(find(reg, "M1277"), e905));
  CHECK(pdmr_visible(find(reg, "M1291"), e905));
  CHECK(pdmr_visible(find(reg, "PLX1"), 1e9));
  const ReadoutConditions rc;
  CHECK(full_inversion_signal(find(reg, "PLX1"), Channel::PDMR, rc) == 0.0);
  CHECK(full_inversion_signal(find(reg, "PLX1"), Channel::ODMR, rc) != 0.0);
}

TEST_CASE("ionization cross-section orders PDMR") {
  const Registry reg = load_default_registry();
  ReadoutConditions rc;
  rc.laser_power = 100.0;
  const double p7 = std::abs(full_inversion_signal(find(reg, "PL7"), Channel::PDMR, rc));
  const double p5 = std::abs(full_inversion_signal(find(reg, "PL5"), Channel::PDMR, rc));
  const double p6 = std::abs(full_inversion_signal(find(reg, "PL6"), Channel::PDMR, rc));
  CHECK(p7 > p5);
  CHECK(p5 > p6);
  const double o7 = std::abs(full_inversion_signal(find(reg, "PL7"), Channel::ODMR, rc));
  const double o5 = std::abs(full_inversion_signal(find(reg, "PL5"), Channel::ODMR, rc));
  const double o6 = std::abs(full_inversion_signal(find(reg, "PL6"), Channel::ODMR, rc));
  CHECK(o6 > o5);
  CHECK(o5 > o7);
}

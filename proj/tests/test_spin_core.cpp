#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "pdmr/registry_io.hpp"
#include "pdmr/spin_core.hpp"

using namespace pdmr;

namespace {

double max_abs(const SpinMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Within `n` units in the last place of the larger magnitude.
bool ulp_close(double a, double b, int n = 1) {
  const double m = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= n * (std::nextafter(m, INFINITY) - m);
}

}  // namespace

TEST_CASE("zfs parameter invariants") {
  CHECK_NOTHROW(ZfsParams(1233.6, 99.0));
  CHECK_NOTHROW(ZfsParams(1350.9, 0.0));
  CHECK_THROWS_AS(ZfsParams(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ZfsParams(-1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ZfsParams(100.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ZfsParams(100.0, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(ZfsParams(std::nan(""), 0.0), std::invalid_argument);
}

TEST_CASE("spin operator algebra") {
  const SpinMatrix x = spin::sx(), y = spin::sy(), z = spin::sz();
  const Complex i(0.0, 1.0);
  CHECK(max_abs(x - x.adjoint()) == 0.0);
  CHECK(max_abs(y - y.adjoint()) == 0.0);
  CHECK(max_abs(z - z.adjoint()) == 0.0);
  CHECK(max_abs(x * y - y * x - i * z) < 1e-15);
  CHECK(max_abs(y * z - z * y - i * x) < 1e-15);
  CHECK(max_abs(z * x - x * z - i * y) < 1e-15);
  CHECK(max_abs(x * x + y * y + z * z - 2.0 * spin::identity()) < 1e-15);
  // Basis order {|+1>, |0>, |-1>}.
  CHECK(z(0, 0).real() == 1.0);
  CHECK(z(1, 1).real() == 0.0);
  CHECK(z(2, 2).real() == -1.0);
}

TEST_CASE("zero-field basis and matrix elements") {
  const auto b = zero_field_basis();
  const SpinVector v[3] = {b.zero, b.plus, b.minus};
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(v[a].dot(v[c]) - (a == c ? 1.0 : 0.0)) < 1e-15);

  const Complex px = b.plus.dot(spin::sx() * b.zero);
  const Complex my = b.minus.dot(spin::sy() * b.zero);
  CHECK(std::abs(px - Complex(1.0, 0.0)) < 1e-15);
  // Standard Sy: <-|Sy|0> = -i (unit modulus, purely imaginary).
  CHECK(std::abs(my - Complex(0.0, -1.0)) < 1e-15);
  // x drives only |0> <-> |+>, y only |0> <-> |->.
  CHECK(std::abs(b.minus.dot(spin::sx() * b.zero)) < 1e-15);
  CHECK(std::abs(b.plus.dot(spin::sy() * b.zero)) < 1e-15);

  const ZfsParams zfs(1233.6, 99.0);
  const SpinMatrix h = build_hamiltonian(zfs);
  const auto e = analytic_energies(zfs);
  CHECK((h * b.zero - e(0) * b.zero).norm() < 1e-9);
  CHECK((h * b.minus - e(1) * b.minus).norm() < 1e-9);
  CHECK((h * b.plus - e(2) * b.plus).norm() < 1e-9);
}

TEST_CASE("hamiltonian spectrum") {
  for (auto [d, e] : {std::pair{1233.6, 99.0}, {1358.5, 16.4}, {1350.9, 0.0}, {2870.0, 5.0},
                      {1.0, 0.999}}) {
    const ZfsParams zfs(d, e);
    const SpinMatrix h = build_hamiltonian(zfs);
    CHECK(max_abs(h - h.adjoint()) == 0.0);
    CHECK(std::abs(h.trace()) < 1e-12 * d);
    Eigen::SelfAdjointEigenSolver<SpinMatrix> es(h);
    const Eigen::Vector3d num = es.eigenvalues();
    const Eigen::Vector3d ana = analytic_energies(zfs);
    std::array<double, 3> sorted{ana(0), ana(1), ana(2)};
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < 3; ++k) CHECK(std::abs(num(k) - sorted[k]) <= 1e-12 * d);
    CHECK(ana(0) == doctest::Approx(-2.0 * d / 3.0).epsilon(1e-15));
    CHECK(ana(1) == doctest::Approx(d / 3.0 - e).epsilon(1e-15));
    CHECK(ana(2) == doctest::Approx(d / 3.0 + e).epsilon(1e-15));
  }
}

TEST_CASE("transition examples") {
  const ZfsParams pl7(1233.6, 99.0);
  const auto b = zero_field_basis();
  const SpinMatrix h = build_hamiltonian(pl7);
  const double e0 = b.zero.dot(h * b.zero).real();
  const double em = b.minus.dot(h * b.minus).real();
  const double ep = b.plus.dot(h * b.plus).real();
  CHECK(em - e0 == doctest::Approx(1134.6).epsilon(1e-14));
  CHECK(ep - e0 == doctest::Approx(1332.6).epsilon(1e-14));

  auto t = transition_frequencies(pl7);
  CHECK(t.f_minus == 1134.6);
  CHECK(t.f_plus == 1332.6);
  t = transition_frequencies(ZfsParams(1358.5, 16.4));
  CHECK(t.f_minus == doctest::Approx(1342.1).epsilon(1e-15));
  CHECK(t.f_plus == doctest::Approx(1374.9).epsilon(1e-15));
  t = transition_frequencies(ZfsParams(1350.9, 0.0));
  CHECK(t.f_minus == 1350.9);
  CHECK(t.f_plus == 1350.9);
  CHECK(transition_frequency(pl7, Transition::Minus) == 1134.6);
  CHECK(transition_frequency(pl7, Transition::Plus) == 1332.6);
}

TEST_CASE("zfs_from_transitions") {
  const ZfsParams z = zfs_from_transitions(1134.6, 1332.6);
  CHECK(z.d_mhz() == 1233.6);
  CHECK(z.e_mhz() == 99.0);
  const ZfsParams p5 = zfs_from_transitions(1342.1, 1374.9);
  CHECK(p5.d_mhz() == doctest::Approx(1358.5).epsilon(1e-15));
  CHECK(p5.e_mhz() == doctest::Approx(16.4).epsilon(1e-12));
  const ZfsParams deg = zfs_from_transitions(1350.9, 1350.9);
  CHECK(deg.d_mhz() == 1350.9);
  CHECK(deg.e_mhz() == 0.0);
  CHECK_THROWS_AS(zfs_from_transitions(1332.6, 1134.6), std::invalid_argument);
  CHECK_THROWS_AS(zfs_from_transitions(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("round trip on registry species and a grid of pairs") {
  for (const auto& s : load_default_registry()) {
    const auto t = transition_frequencies(s.zfs);
    const ZfsParams back = zfs_from_transitions(t.f_minus, t.f_plus);
    CHECK(ulp_close(back.d_mhz(), s.zfs.d_mhz()));
    // E is a difference of two ~D-sized numbers, so its round-off is D-scale.
    CHECK(std::abs(back.e_mhz() - s.zfs.e_mhz()) <= std::nextafter(s.zfs.d_mhz(), INFINITY) - s.zfs.d_mhz());
  }
  for (double lo = 1000.0; lo < 1400.0; lo += 7.3) {
    for (double gap = 0.0; gap < 300.0; gap += 11.1) {
      const double hi = lo + gap;
      const auto t = transition_frequencies(zfs_from_transitions(lo, hi));
      CHECK(ulp_close(t.f_minus, lo, 2));
      CHECK(ulp_close(t.f_plus, hi, 2));
    }
  }
}

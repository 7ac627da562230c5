#pragma once

// Spin-1 operator algebra and the zero-field-splitting Hamiltonian.
//
// Conventions used throughout the library:
//   * energies and frequencies in MHz with h = 1, times in microseconds;
//   * matrix basis ordered {|+1>, |0>, |-1>} (index 0, 1, 2).

#include <complex>

#include <Eigen/Dense>

namespace pdmr {

using Complex = std::complex<double>;
using SpinMatrix = Eigen::Matrix3cd;
using SpinVector = Eigen::Vector3cd;

/// Axial (D) and transverse (E) zero-field splitting of one spin-1 species.
/// Construction enforces D > 0 and 0 <= E < D.
class ZfsParams {
 public:
  ZfsParams(double d_mhz, double e_mhz);

  double d_mhz() const { return d_; }
  double e_mhz() const { return e_; }

  bool operator==(const ZfsParams&) const = default;

 private:
  double d_;
  double e_;
};

/// The two zero-field transitions out of |0>.
///   Minus: |0> <-> |->, frequency D - E, driven by the defect-frame y field.
///   Plus:  |0> <-> |+>, frequency D + E, driven by the defect-frame x field.
enum class Transition { Minus, Plus };

const char* to_string(Transition t);

namespace spin {

SpinMatrix sx();
SpinMatrix sy();
SpinMatrix sz();
SpinMatrix identity();

}  // namespace spin

/// |0>, |+> = (|1> + |-1>)/sqrt2, |-> = (|1> - |-1>)/sqrt2.
struct ZeroFieldBasis {
  SpinVector zero;
  SpinVector plus;
  SpinVector minus;
};

ZeroFieldBasis zero_field_basis();

/// H = D (Sz^2 - 2/3) + E (Sx^2 - Sy^2).
SpinMatrix build_hamiltonian(const ZfsParams& zfs);

/// Analytic eigenvalues ordered as (|0>, |->, |+>): {-2D/3, D/3 - E, D/3 + E}.
Eigen::Vector3d analytic_energies(const ZfsParams& zfs);

struct TransitionPair {
  double f_minus;
  double f_plus;
};

TransitionPair transition_frequencies(const ZfsParams& zfs);

double transition_frequency(const ZfsParams& zfs, Transition t);

/// Inverse of transition_frequencies. Throws std::invalid_argument unless
/// 0 < f_lo <= f_hi.
ZfsParams zfs_from_transitions(double f_lo, double f_hi);

}  // namespace pdmr

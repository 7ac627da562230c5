#include "pdmr/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pdmr/noise.hpp"

namespace pdmr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(-i 2 pi dt H) for Hermitian H.
SpinMatrix hermitian_propagator(const SpinMatrix& h, double dt) {
  Eigen::SelfAdjointEigenSolver<SpinMatrix> es(h);
  const auto& v = es.eigenvectors();
  Eigen::Vector3cd phases;
  for (int k = 0; k < 3; ++k) {
    phases(k) = std::polar(1.0, -kTwoPi * dt * es.eigenvalues()(k));
  }
  return v * phases.asDiagonal() * v.adjoint();
}

Populations measure(const SpinVector& psi, const ZeroFieldBasis& basis) {
  return {std::norm(basis.zero.dot(psi)), std::norm(basis.plus.dot(psi)),
          std::norm(basis.minus.dot(psi))};
}

}  // namespace

void DriveParams::validate() const {
  if (!(frequency_mhz > 0.0)) throw std::invalid_argument("DriveParams: frequency must be > 0");
  if (!(omega_x >= 0.0 && omega_y >= 0.0 && omega_z >= 0.0)) {
    throw std::invalid_argument("DriveParams: couplings must be >= 0");
  }
}

Trajectory propagate_full(const ZfsParams& zfs, const DriveParams& drive, double t_final_us,
                          double dt_us, Stepper stepper, int sample_every) {
  drive.validate();
  if (!(dt_us > 0.0) || dt_us > 1.0 / (20.0 * drive.frequency_mhz)) {
    throw StepSizeError("propagate_full: dt must satisfy 0 < dt <= 1/(20 f); got dt=" +
                        std::to_string(dt_us) + " us for f=" +
                        std::to_string(drive.frequency_mhz) + " MHz");
  }
  if (!(t_final_us >= 0.0)) throw std::invalid_argument("propagate_full: t_final must be >= 0");
  if (sample_every < 1) throw std::invalid_argument("propagate_full: sample_every must be >= 1");

  const SpinMatrix h0 = build_hamiltonian(zfs);
  const SpinMatrix coupling =
      drive.omega_x * spin::sx() + drive.omega_y * spin::sy() + drive.omega_z * spin::sz();
  const double w = kTwoPi * drive.frequency_mhz;
  auto hamiltonian_at = [&](double t) -> SpinMatrix {
    return h0 + std::cos(w * t + drive.phase_rad) * coupling;
  };

  const ZeroFieldBasis basis = zero_field_basis();
  SpinVector psi = basis.zero;
  const auto steps = static_cast<long>(std::ceil(t_final_us / dt_us - 1e-9));

  Trajectory traj;
  traj.time_us.push_back(0.0);
  traj.populations.push_back(measure(psi, basis));

  // Gauss-Legendre nodes and commutator-free Magnus weights.
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double a1 = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0;
  const double a2 = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;

  for (long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * dt_us;
    if (stepper == Stepper::Midpoint) {
      psi = hermitian_propagator(hamiltonian_at(t + 0.5 * dt_us), dt_us) * psi;
    } else {
      const SpinMatrix h1 = hamiltonian_at(t + c1 * dt_us);
      const SpinMatrix h2 = hamiltonian_at(t + c2 * dt_us);
      // Each factor is a weighted Hamiltonian over the full step, so the
      // weights sum to one per factor after the factor of 2 below.
      psi = hermitian_propagator(2.0 * (a2 * h1 + a1 * h2), 0.5 * dt_us) * psi;
      psi = hermitian_propagator(2.0 * (a1 * h1 + a2 * h2), 0.5 * dt_us) * psi;
    }
    if ((n + 1) % sample_every == 0 || n + 1 == steps) {
      traj.time_us.push_back(static_cast<double>(n + 1) * dt_us);
      traj.populations.push_back(measure(psi, basis));
    }
  }
  return traj;
}

double rabi_rwa(double coupling_mhz, double detuning_mhz, double t_us) {
  if (!(coupling_mhz >= 0.0)) throw std::invalid_argument("rabi_rwa: coupling must be >= 0");
  const double gen2 = coupling_mhz * coupling_mhz + detuning_mhz * detuning_mhz;
  if (gen2 == 0.0) return 1.0;
  const double s = std::sin(std::numbers::pi * std::sqrt(gen2) * t_us);
  return 1.0 - coupling_mhz * coupling_mhz / gen2 * s * s;
}

double damped_rabi_population(double coupling_mhz, double detuning_mhz, double t_us,
                              double decay_time_us) {
  const double gen2 = coupling_mhz * coupling_mhz + detuning_mhz * detuning_mhz;
  if (gen2 == 0.0) return 1.0;
  const double depth = coupling_mhz * coupling_mhz / gen2;
  const double envelope = decay_time_us > 0.0 ? std::exp(-t_us / decay_time_us) : 1.0;
  return 1.0 - 0.5 * depth *
                   (1.0 - envelope * std::cos(2.0 * std::numbers::pi * std::sqrt(gen2) * t_us));
}

std::vector<double> transition_couplings(const DefectSpecies& species, const MwField& field,
                                         Transition transition) {
  std::vector<double> out;
  if (species.orientation == OrientationClass::Axial) {
    const auto set = rabi_couplings(field, {axial_orientation()});
    const auto& c = set.couplings.front();
    out.push_back(species.rabi_scale * std::hypot(c.omega_x, c.omega_y));
    return out;
  }
  for (const auto& c : rabi_couplings(field, basal_orientations()).couplings) {
    out.push_back(species.rabi_scale *
                  (transition == Transition::Plus ? c.omega_x : c.omega_y));
  }
  return out;
}

std::vector<RabiLine> ensemble_rabi_lines(const DefectSpecies& species, const MwField& field,
                                          Transition transition) {
  const auto couplings = transition_couplings(species, field, transition);
  std::vector<RabiLine> lines;
  for (const auto& m : distinct_values(couplings, 1e-9)) {
    lines.push_back({m.value, static_cast<double>(m.count) / couplings.size()});
  }
  return lines;
}

void RabiTrace::validate() const {
  if (time_us.size() != signal.size()) {
    throw std::invalid_argument("RabiTrace: time and signal lengths differ");
  }
  if (time_us.size() < 2) throw std::invalid_argument("RabiTrace: need at least two points");
  const double step = time_us[1] - time_us[0];
  if (!(step > 0.0)) throw std::invalid_argument("RabiTrace: time grid must be increasing");
  for (std::size_t i = 1; i < time_us.size(); ++i) {
    const double d = time_us[i] - time_us[i - 1];
    if (!(d > 0.0) || std::abs(d - step) > 1e-6 * step) {
      throw std::invalid_argument("RabiTrace: time grid must be uniform and increasing (row " +
                                  std::to_string(i) + ")");
    }
  }
  for (double s : signal) {
    if (!std::isfinite(s)) throw std::invalid_argument("RabiTrace: signal must be finite");
  }
}

RabiTrace simulate_ensemble_rabi(const DefectSpecies& species, const MwField& field,
                                 Transition transition, const std::vector<double>& durations_us,
                                 const EnsembleRabiOptions& options) {
  const auto couplings = transition_couplings(species, field, transition);
  RabiTrace trace;
  trace.time_us = durations_us;
  trace.drive_frequency_mhz = transition_frequency(species.zfs, transition) + options.detuning_mhz;
  trace.signal.reserve(durations_us.size());
  NoiseSource noise(options.seed, 0);
  for (double t : durations_us) {
    double p0 = 0.0;
    for (double w : couplings) {
      p0 += damped_rabi_population(w, options.detuning_mhz, t, options.decay_time_us);
    }
    p0 /= static_cast<double>(couplings.size());
    p0 += options.drift_intercept + options.drift_slope_per_us * t;
    p0 += noise.normal(options.noise_sigma);
    trace.signal.push_back(p0);
  }
  return trace;
}

std::vector<double> uniform_grid(double t0, double step, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = t0 + step * static_cast<double>(i);
  return g;
}

}  // namespace pdmr

#pragma once

// Multi-component damped-cosine decomposition of Rabi traces:
//   y(t) = sum_i A_i exp(-gamma_i t) cos(2 pi f_i t + phi_i) + a + b t.

#include <vector>

#include "pdmr/dynamics.hpp"
#include "pdmr/lm.hpp"

namespace pdmr {

struct RabiComponent {
  double frequency_mhz = 0.0;
  double amplitude = 0.0;
  double decay_rate = 0.0;  // 1/us
  double phase_rad = 0.0;
  double frequency_err = 0.0;
  double amplitude_err = 0.0;
  double decay_err = 0.0;
  double phase_err = 0.0;
};

struct ModelScore {
  int n = 0;
  double aicc = 0.0;  // +inf for a failed fit
  double rss = 0.0;
  bool failed = false;
  /// Converged, but some component amplitude is not significant.
  bool insignificant = false;
};

struct RabiComponentFit {
  std::vector<RabiComponent> components;  // ascending frequency
  double intercept = 0.0;
  double slope = 0.0;
  double rss = 0.0;
  double residual_rms = 0.0;
  double aicc = 0.0;
  /// Two fitted frequencies closer than 1 / (2 * trace length).
  bool degenerate = false;
  int iterations = 0;
  /// Filled by select_components.
  std::vector<ModelScore> scores;

  int n() const { return static_cast<int>(components.size()); }
  std::vector<double> frequencies() const;
  double evaluate(double t_us) const;
  double evaluate_component(std::size_t i, double t_us) const;
};

struct RabiFitOptions {
  LmOptions lm;
  /// Zero padding factor of the seed spectrum.
  int dft_oversample = 16;
  /// Extra Fourier peaks beyond N considered as frequency seeds.
  int extra_seeds = 2;
  /// Model selection treats an N > 1 fit as failed when any component's
  /// amplitude is below this many standard errors.
  double min_amplitude_snr = 3.0;
};

/// Small-sample corrected Akaike criterion for n points and k parameters.
double aicc(double rss, std::size_t n, std::size_t k);

/// Local maxima of the zero-padded DFT magnitude of the linearly detrended
/// trace, strongest first.
std::vector<double> fourier_peaks(const RabiTrace& trace, std::size_t count, int oversample = 16);

/// Best of a multi-start fit. Seeds: every N-subset of the top N + extra
/// Fourier peaks, plus a matrix-pencil estimate; linear parameters are
/// initialized by linear least squares. Throws FitError when no start
/// converges.
RabiComponentFit fit_rabi(const RabiTrace& trace, int n_components,
                          const RabiFitOptions& options = {});

/// Fits N = 1..n_max and returns the fit minimizing AICc with the full score
/// table attached. Failed or insignificant N score +inf.
RabiComponentFit select_components(const RabiTrace& trace, int n_max,
                                   const RabiFitOptions& options = {});

}  // namespace pdmr

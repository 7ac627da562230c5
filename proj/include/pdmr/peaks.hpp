#pragma once

// Lorentzian peak detection and fitting of spectra.

#include <optional>
#include <vector>

#include "pdmr/lm.hpp"
#include "pdmr/sequence_engine.hpp"

namespace pdmr {

struct PeakGuess {
  double center_mhz;
  double fwhm_mhz;
  double amplitude;
};

struct PeakFit {
  double center_mhz = 0.0;
  double fwhm_mhz = 0.0;
  /// Signed peak height above the baseline.
  double amplitude = 0.0;
  double center_err = 0.0;
  double fwhm_err = 0.0;
  double amplitude_err = 0.0;
};

struct PeakFitResult {
  std::vector<PeakFit> peaks;  // sorted by center
  double baseline = 0.0;
  double baseline_err = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;
};

struct PeakDetectOptions {
  /// Threshold (height and prominence) in units of the first-difference
  /// noise estimate.
  double threshold_sigma = 5.0;
  /// Lower bound on the threshold relative to the largest excursion, so a
  /// noiseless spectrum does not report rounding ripple.
  double relative_floor = 1e-3;
  /// Weaker extrema closer than this to a stronger one are dropped.
  double min_separation_mhz = 1.0;
  double fwhm_guess_mhz = 2.0;
};

/// Robust noise estimate: 1.4826 * MAD of the signal about its median.
double mad_sigma(const std::vector<double>& y);

double median_of(std::vector<double> y);

/// Noise estimate from first differences, insensitive to smooth structure.
double difference_sigma(const std::vector<double>& y);

/// Prominent local extrema of |y - median| above threshold (both signs).
std::vector<PeakGuess> detect_peaks(const std::vector<double>& freq_mhz,
                                    const std::vector<double>& signal,
                                    const PeakDetectOptions& options = {});

double lorentzian(double f, double center, double fwhm, double amplitude);

/// Sum of Lorentzians plus constant baseline. Guesses are detected when not
/// supplied. Throws FitError on non-convergence.
PeakFitResult fit_peaks(const std::vector<double>& freq_mhz, const std::vector<double>& signal,
                        std::optional<std::vector<PeakGuess>> guesses = std::nullopt,
                        const PeakDetectOptions& detect = {}, const LmOptions& lm = {});

PeakFitResult fit_peaks(const Spectrum& spectrum,
                        std::optional<std::vector<PeakGuess>> guesses = std::nullopt,
                        const PeakDetectOptions& detect = {}, const LmOptions& lm = {});

struct TemplateAmplitude {
  double amplitude;
  double stderr_amplitude;
};

/// Linear least-squares amplitude of a fixed Lorentzian (plus constant) over
/// the points within `half_window_mhz` of the center.
TemplateAmplitude template_amplitude(const std::vector<double>& freq_mhz,
                                     const std::vector<double>& signal, double center_mhz,
                                     double fwhm_mhz, double half_window_mhz);

/// Joint fit of fixed Lorentzians at every center plus a constant over the
/// whole trace, so neighbouring tails are attributed to their own line.
/// A positive `cutoff_mhz` zeroes each template beyond that detuning.
std::vector<TemplateAmplitude> template_amplitudes(const std::vector<double>& freq_mhz,
                                                   const std::vector<double>& signal,
                                                   const std::vector<double>& centers_mhz,
                                                   double fwhm_mhz, double cutoff_mhz = 0.0);

}  // namespace pdmr

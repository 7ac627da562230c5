#pragma once

// x- vs. y-driven assignment of a transition from Rabi multiplets measured at
// several MW powers.

#include <string>
#include <vector>

#include "pdmr/rabi_fit.hpp"

namespace pdmr {

enum class DriveAxis { XDriven, YDriven, Unknown };

const char* to_string(DriveAxis a);

struct PowerLawFit {
  double prefactor = 0.0;
  double exponent = 0.0;
  double exponent_err = 0.0;
};

/// Least-squares line in log-log space: value = prefactor * power^exponent.
PowerLawFit fit_power_law(const std::vector<double>& powers, const std::vector<double>& values);

struct PowerPoint {
  double mw_power;
  RabiComponentFit fit;
};

struct ClassifyOptions {
  /// |(v3 - v2) - (v2 - v1)| <= spacing_tol * mean spacing.
  double spacing_tol = 0.10;
  /// |v2 / v1 - 2| <= ratio_tol.
  double ratio_tol = 0.15;
  double expected_exponent = 0.5;
  double exponent_tol = 0.05;
};

struct Classification {
  DriveAxis verdict = DriveAxis::Unknown;
  std::vector<DriveAxis> per_point;
  /// Power law per component index (ascending frequency), when every point
  /// has the same component count.
  std::vector<PowerLawFit> exponents;
  std::string reason;
};

/// Per-point pattern test (equal-spacing triplet or 1:2 doublet), majority
/// vote, then the sqrt(P) check on every component. Never guesses: any
/// failed check yields Unknown with the reason.
Classification classify_transition(const std::vector<PowerPoint>& series,
                                   const ClassifyOptions& options = {});

DriveAxis classify_point(const std::vector<double>& frequencies, const ClassifyOptions& options);

}  // namespace pdmr

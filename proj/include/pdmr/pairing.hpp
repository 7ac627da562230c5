#pragma once

// Two-frequency transition pairing and the full assignment pipeline.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdmr/peaks.hpp"
#include "pdmr/sequence_engine.hpp"
#include "pdmr/species.hpp"
#include "pdmr/spin_core.hpp"

namespace pdmr {

/// response(i, j): differential response at line j with MW1 parked on line i.
/// noise(i): off-peak noise of row i's differential spectrum.
struct ResponseMatrix {
  std::vector<double> lines_mhz;
  Eigen::MatrixXd response;
  Eigen::VectorXd noise;

  void validate() const;
};

struct TransitionPairing {
  double f_lo;
  double f_hi;
  ZfsParams zfs;
  std::string label;  // registry species or "unassigned"
  double response_lo_to_hi;
  double response_hi_to_lo;
};

struct PairingResult {
  std::vector<TransitionPairing> pairs;
  std::vector<double> unpaired;
};

struct PairingConflict {
  double line_mhz;
  std::vector<double> partners_mhz;
};

class AmbiguityError : public std::runtime_error {
 public:
  AmbiguityError(const std::string& what, std::vector<PairingConflict> conflicts)
      : std::runtime_error(what), conflicts_(std::move(conflicts)) {}
  const std::vector<PairingConflict>& conflicts() const { return conflicts_; }

 private:
  std::vector<PairingConflict> conflicts_;
};

struct PairingOptions {
  double threshold_sigma = 5.0;
  /// Floor on the threshold relative to the largest off-diagonal response,
  /// for noiseless matrices.
  double relative_floor = 1e-6;
  /// Lines closer than this to the MW1 line are not candidate partners.
  double self_exclusion_mhz = 4.0;
  /// Registry label match tolerance on both transition frequencies.
  double label_tolerance_mhz = 0.5;
};

/// Mutual above-threshold responses define pairs. A line with more than one
/// mutual partner raises AmbiguityError listing every conflict.
PairingResult pair_transitions(const ResponseMatrix& matrix, const Registry* registry = nullptr,
                               const PairingOptions& options = {});

struct AssignmentOptions {
  Channel channel = Channel::PDMR;
  double f_start_mhz = 1100.0;
  double f_stop_mhz = 1400.0;
  double step_mhz = 0.2;
  double mw_power = 1.0;
  PairingOptions pairing;
};

struct AssignmentReport {
  Spectrum survey;
  PeakFitResult peaks;
  std::vector<Spectrum> differential;  // one per line, same order as lines
  ResponseMatrix matrix;
  std::optional<PairingResult> pairing;
  std::vector<PairingConflict> conflicts;
};

/// Survey spectrum, peak fit, a two-frequency scan with MW1 on every detected
/// line, response matrix, pairing. Ambiguity is recorded in `conflicts`
/// (pairing left empty) rather than thrown.
AssignmentReport run_assignment(const Registry& registry, const EngineSettings& settings,
                                const AssignmentOptions& options = {});

}  // namespace pdmr

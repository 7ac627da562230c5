#include "pdmr/pairing.hpp"

#include <algorithm>
#include <cmath>

namespace pdmr {

void ResponseMatrix::validate() const {
  const auto n = static_cast<Eigen::Index>(lines_mhz.size());
  if (response.rows() != n || response.cols() != n || noise.size() != n) {
    throw std::invalid_argument("ResponseMatrix: dimensions do not match the line list");
  }
  if (!std::is_sorted(lines_mhz.begin(), lines_mhz.end())) {
    throw std::invalid_argument("ResponseMatrix: lines must be ascending");
  }
}

namespace {

std::string label_for(double f_lo, double f_hi, const Registry* registry, double tol) {
  if (!registry) return "unassigned";
  std::string best = "unassigned";
  double best_err = tol * 2.0 + 1.0;
  for (const auto& s : *registry) {
    if (s.orientation != OrientationClass::Basal) continue;
    const auto tf = transition_frequencies(s.zfs);
    const double e1 = std::abs(tf.f_minus - f_lo), e2 = std::abs(tf.f_plus - f_hi);
    if (e1 <= tol && e2 <= tol && e1 + e2 < best_err) {
      best = s.name;
      best_err = e1 + e2;
    }
  }
  return best;
}

}  // namespace

PairingResult pair_transitions(const ResponseMatrix& m, const Registry* registry,
                               const PairingOptions& o) {
  m.validate();
  const auto n = static_cast<Eigen::Index>(m.lines_mhz.size());
  PairingResult out;
  if (n == 0) return out;

  auto candidate = [&](Eigen::Index i, Eigen::Index j) {
    return i != j && std::abs(m.lines_mhz[j] - m.lines_mhz[i]) >= o.self_exclusion_mhz;
  };
  double max_off = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (candidate(i, j)) max_off = std::max(max_off, std::abs(m.response(i, j)));
    }
  }
  auto above = [&](Eigen::Index i, Eigen::Index j) {
    const double thr = std::max(o.threshold_sigma * m.noise(i), o.relative_floor * max_off);
    return max_off > 0.0 && std::abs(m.response(i, j)) > thr;
  };

  std::vector<std::vector<Eigen::Index>> partners(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (candidate(i, j) && above(i, j) && above(j, i)) partners[i].push_back(j);
    }
  }
  std::vector<PairingConflict> conflicts;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (partners[i].size() > 1) {
      PairingConflict c{m.lines_mhz[i], {}};
      for (auto j : partners[i]) c.partners_mhz.push_back(m.lines_mhz[j]);
      conflicts.push_back(c);
    }
  }
  if (!conflicts.empty()) {
    throw AmbiguityError("pair_transitions: " + std::to_string(conflicts.size()) +
                             " line(s) claimed by more than one partner",
                         conflicts);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (partners[i].empty()) {
      out.unpaired.push_back(m.lines_mhz[i]);
      continue;
    }
    const Eigen::Index j = partners[i].front();
    if (j < i) continue;
    const double lo = m.lines_mhz[i], hi = m.lines_mhz[j];
    out.pairs.push_back({lo, hi, zfs_from_transitions(lo, hi),
                         label_for(lo, hi, registry, o.label_tolerance_mhz), m.response(i, j),
                         m.response(j, i)});
  }
  return out;
}

AssignmentReport run_assignment(const Registry& registry, const EngineSettings& settings,
                                const AssignmentOptions& o) {
  AssignmentReport rep;
  rep.survey = run_pulsed_spectrum(registry, o.channel, o.f_start_mhz, o.f_stop_mhz, o.step_mhz,
                                   o.mw_power, settings);
  PeakDetectOptions detect;
  detect.fwhm_guess_mhz = settings.linewidth_fwhm_mhz;
  rep.peaks = fit_peaks(rep.survey, std::nullopt, detect);

  auto& lines = rep.matrix.lines_mhz;
  for (const auto& p : rep.peaks.peaks) lines.push_back(p.center_mhz);
  const auto n = static_cast<Eigen::Index>(lines.size());
  rep.matrix.response = Eigen::MatrixXd::Zero(n, n);
  rep.matrix.noise = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    EngineSettings s = settings;
    s.seed = settings.seed + 1000003ULL * static_cast<std::uint64_t>(i + 1);
    Spectrum d = run_two_frequency(registry, lines[i], o.f_start_mhz, o.f_stop_mhz, o.step_mhz,
                                   o.mw_power, o.channel, s);
    rep.matrix.noise(i) = mad_sigma(d.signal);
    const auto amps = template_amplitudes(
        d.freq_mhz, d.signal, lines, settings.linewidth_fwhm_mhz,
        settings.address_window_fwhm * settings.linewidth_fwhm_mhz);
    for (Eigen::Index j = 0; j < n; ++j)
      rep.matrix.response(i, j) = amps[static_cast<std::size_t>(j)].amplitude;
    rep.differential.push_back(std::move(d));
  }
  try {
    rep.pairing = pair_transitions(rep.matrix, &registry, o.pairing);
  } catch (const AmbiguityError& e) {
    rep.conflicts = e.conflicts();
  }
  return rep;
}

}  // namespace pdmr

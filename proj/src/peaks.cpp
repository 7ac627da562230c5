#include "pdmr/peaks.hpp"

#include <algorithm>
#include <cmath>

namespace pdmr {

double median_of(std::vector<double> y) {
  if (y.empty()) throw std::invalid_argument("median of empty set");
  const std::size_t n = y.size();
  std::nth_element(y.begin(), y.begin() + n / 2, y.end());
  const double hi = y[n / 2];
  if (n % 2 == 1) return hi;
  return 0.5 * (*std::max_element(y.begin(), y.begin() + n / 2) + hi);
}

double mad_sigma(const std::vector<double>& y) {
  const double m = median_of(y);
  std::vector<double> dev(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dev[i] = std::abs(y[i] - m);
  return 1.4826 * median_of(dev);
}

double lorentzian(double f, double center, double fwhm, double amplitude) {
  const double x = 2.0 * (f - center) / fwhm;
  return amplitude / (1.0 + x * x);
}

double difference_sigma(const std::vector<double>& y) {
  if (y.size() < 3) return 0.0;
  std::vector<double> d(y.size() - 1);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) d[i] = y[i + 1] - y[i];
  return mad_sigma(d) / std::sqrt(2.0);
}

std::vector<PeakGuess> detect_peaks(const std::vector<double>& freq, const std::vector<double>& y,
                                    const PeakDetectOptions& opt) {
  if (freq.size() != y.size()) throw std::invalid_argument("detect_peaks: size mismatch");
  if (y.size() < 3) return {};
  const double base = median_of(y);
  std::vector<double> a(y.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    a[i] = std::abs(y[i] - base);
    peak = std::max(peak, a[i]);
  }
  const double threshold =
      std::max(opt.threshold_sigma * difference_sigma(y), opt.relative_floor * peak);
  if (!(peak > threshold)) return {};

  // Candidates are local maxima of |y - base| whose prominence (height above
  // the higher of the two saddles toward taller ground) clears the threshold,
  // which rejects noise ripple on the flanks of strong lines. A side that runs
  // off the sweep counts its lowest sample as the saddle, so the skirt of a
  // line centered outside the range is not taken for a peak.
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(a[i] > threshold && a[i] >= a[i - 1] && a[i] > a[i + 1])) continue;
    double left = a[i], right = a[i];
    std::size_t l = i, r = i;
    while (l > 0 && a[l - 1] <= a[i]) left = std::min(left, a[--l]);
    while (r + 1 < a.size() && a[r + 1] <= a[i]) right = std::min(right, a[++r]);
    const double saddle = std::max(left, right);
    if (a[i] - saddle > threshold) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return a[l] > a[r]; });
  std::vector<std::size_t> kept;
  for (std::size_t i : idx) {
    bool close = false;
    for (std::size_t k : kept) close = close || std::abs(freq[i] - freq[k]) < opt.min_separation_mhz;
    if (!close) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  std::vector<PeakGuess> out;
  for (std::size_t i : kept) out.push_back({freq[i], opt.fwhm_guess_mhz, y[i] - base});
  return out;
}

namespace {

// Parameter layout: [c0, w0, a0, c1, w1, a1, ..., baseline].
Eigen::VectorXd model_residual(const std::vector<double>& f, const std::vector<double>& y,
                               const Eigen::VectorXd& p) {
  const Eigen::Index np = (p.size() - 1) / 3;
  Eigen::VectorXd r(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) {
    double m = p(p.size() - 1);
    for (Eigen::Index k = 0; k < np; ++k) m += lorentzian(f[i], p(3 * k), p(3 * k + 1), p(3 * k + 2));
    r(static_cast<Eigen::Index>(i)) = m - y[i];
  }
  return r;
}

Eigen::MatrixXd model_jacobian(const std::vector<double>& f, const Eigen::VectorXd& p) {
  const Eigen::Index np = (p.size() - 1) / 3;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(f.size()), p.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < np; ++k) {
      const double c = p(3 * k), w = p(3 * k + 1), a = p(3 * k + 2);
      const double x = 2.0 * (f[i] - c) / w;
      const double d = 1.0 / (1.0 + x * x);
      j(row, 3 * k) = a * d * d * 2.0 * x * 2.0 / w;
      j(row, 3 * k + 1) = a * d * d * 2.0 * x * x / w;
      j(row, 3 * k + 2) = d;
    }
    j(row, p.size() - 1) = 1.0;
  }
  return j;
}

}  // namespace

PeakFitResult fit_peaks(const std::vector<double>& freq, const std::vector<double>& y,
                        std::optional<std::vector<PeakGuess>> guesses,
                        const PeakDetectOptions& detect, const LmOptions& lm) {
  if (freq.size() != y.size() || freq.empty()) {
    throw std::invalid_argument("fit_peaks: need matching, non-empty frequency and signal");
  }
  const std::vector<PeakGuess> g = guesses ? *guesses : detect_peaks(freq, y, detect);
  for (const auto& p : g) {
    if (!(p.fwhm_mhz > 0.0)) throw std::invalid_argument("fit_peaks: guess FWHM must be > 0");
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd x0(3 * n + 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    x0(3 * k) = g[k].center_mhz;
    x0(3 * k + 1) = g[k].fwhm_mhz;
    x0(3 * k + 2) = g[k].amplitude;
  }
  x0(3 * n) = median_of(y);

  const LmResult res = levenberg_marquardt(
      [&](const Eigen::VectorXd& p) { return model_residual(freq, y, p); },
      [&](const Eigen::VectorXd& p) { return model_jacobian(freq, p); }, x0, lm);
  const double rms = std::sqrt(res.rss / static_cast<double>(y.size()));
  if (!res.converged) {
    throw FitError("fit_peaks: no convergence within " + std::to_string(lm.max_iterations) +
                       " iterations",
                   std::vector<double>(res.params.data(), res.params.data() + res.params.size()), rms);
  }
  const Eigen::VectorXd err = standard_errors(res);
  PeakFitResult out;
  for (Eigen::Index k = 0; k < n; ++k) {
    PeakFit pk;
    pk.center_mhz = res.params(3 * k);
    pk.fwhm_mhz = std::abs(res.params(3 * k + 1));
    pk.amplitude = res.params(3 * k + 2);
    pk.center_err = err(3 * k);
    pk.fwhm_err = err(3 * k + 1);
    pk.amplitude_err = err(3 * k + 2);
    out.peaks.push_back(pk);
  }
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const PeakFit& a, const PeakFit& b) { return a.center_mhz < b.center_mhz; });
  out.baseline = res.params(3 * n);
  out.baseline_err = err(3 * n);
  out.residual_rms = rms;
  out.iterations = res.iterations;
  return out;
}

PeakFitResult fit_peaks(const Spectrum& spectrum, std::optional<std::vector<PeakGuess>> guesses,
                        const PeakDetectOptions& detect, const LmOptions& lm) {
  return fit_peaks(spectrum.freq_mhz, spectrum.signal, std::move(guesses), detect, lm);
}

TemplateAmplitude template_amplitude(const std::vector<double>& freq, const std::vector<double>& y,
                                     double center, double fwhm, double half_window) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    if (std::abs(freq[i] - center) <= half_window) idx.push_back(i);
  }
  if (idx.size() < 3) throw std::invalid_argument("template_amplitude: too few points in window");
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = lorentzian(freq[idx[i]], center, fwhm, 1.0);
    a(i, 1) = 1.0;
    b(i) = y[idx[i]];
  }
  const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(b);
  const double rss = (a * sol - b).squaredNorm();
  const Eigen::Matrix2d cov = (a.transpose() * a).inverse() * (rss / static_cast<double>(m - 2));
  return {sol(0), std::sqrt(std::max(0.0, cov(0, 0)))};
}

std::vector<TemplateAmplitude> template_amplitudes(const std::vector<double>& freq,
                                                   const std::vector<double>& y,
                                                   const std::vector<double>& centers,
                                                   double fwhm, double cutoff) {
  if (freq.size() != y.size()) throw std::invalid_argument("template_amplitudes: size mismatch");
  const auto m = static_cast<Eigen::Index>(freq.size());
  const auto k = static_cast<Eigen::Index>(centers.size());
  if (m < k + 2) throw std::invalid_argument("template_amplitudes: too few points");
  Eigen::MatrixXd a(m, k + 1);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double f = freq[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) {
      const double c = centers[static_cast<std::size_t>(j)];
      a(i, j) = (cutoff > 0.0 && std::abs(f - c) > cutoff) ? 0.0 : lorentzian(f, c, fwhm, 1.0);
    }
    a(i, k) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
  const double rss = (a * sol - b).squaredNorm();
  const Eigen::MatrixXd cov =
      (a.transpose() * a).inverse() * (rss / static_cast<double>(m - k - 1));
  std::vector<TemplateAmplitude> out;
  for (Eigen::Index j = 0; j < k; ++j)
    out.push_back({sol(j), std::sqrt(std::max(0.0, cov(j, j)))});
  return out;
}

}  // namespace pdmr

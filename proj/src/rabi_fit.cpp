#include "pdmr/rabi_fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Eigenvalues>

namespace pdmr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Seed {
  double frequency;
  double decay;
};

// Layout: [f, A, gamma, phi] per component, then intercept, slope.
Eigen::VectorXd residual(const std::vector<double>& t, const std::vector<double>& y,
                         const Eigen::VectorXd& p) {
  const Eigen::Index n = (p.size() - 2) / 4;
  const double a = p(p.size() - 2), b = p(p.size() - 1);
  Eigen::VectorXd r(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    double m = a + b * t[i];
    for (Eigen::Index k = 0; k < n; ++k) {
      m += p(4 * k + 1) * std::exp(-p(4 * k + 2) * t[i]) * std::cos(kTwoPi * p(4 * k) * t[i] + p(4 * k + 3));
    }
    r(static_cast<Eigen::Index>(i)) = m - y[i];
  }
  return r;
}

Eigen::MatrixXd jacobian(const std::vector<double>& t, const Eigen::VectorXd& p) {
  const Eigen::Index n = (p.size() - 2) / 4;
  Eigen::MatrixXd j(static_cast<Eigen::Index>(t.size()), p.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double f = p(4 * k), amp = p(4 * k + 1), g = p(4 * k + 2), ph = p(4 * k + 3);
      const double e = std::exp(-g * t[i]);
      const double th = kTwoPi * f * t[i] + ph;
      const double c = std::cos(th), s = std::sin(th);
      j(row, 4 * k) = -amp * e * s * kTwoPi * t[i];
      j(row, 4 * k + 1) = e * c;
      j(row, 4 * k + 2) = -t[i] * amp * e * c;
      j(row, 4 * k + 3) = -amp * e * s;
    }
    j(row, p.size() - 2) = 1.0;
    j(row, p.size() - 1) = t[i];
  }
  return j;
}

// Linear least squares for amplitudes/phases/background at fixed
// frequencies and decays.
Eigen::VectorXd linear_start(const std::vector<double>& t, const std::vector<double>& y,
                             const std::vector<Seed>& seeds) {
  const auto n = static_cast<Eigen::Index>(seeds.size());
  const auto m = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a(m, 2 * n + 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double e = std::exp(-seeds[k].decay * t[i]);
      a(i, 2 * k) = e * std::cos(kTwoPi * seeds[k].frequency * t[i]);
      a(i, 2 * k + 1) = e * std::sin(kTwoPi * seeds[k].frequency * t[i]);
    }
    a(i, 2 * n) = 1.0;
    a(i, 2 * n + 1) = t[i];
    b(i) = y[i];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  Eigen::VectorXd p(4 * n + 2);
  for (Eigen::Index k = 0; k < n; ++k) {
    // A cos(w t + phi) = A cos(phi) cos(w t) - A sin(phi) sin(w t)
    p(4 * k) = seeds[k].frequency;
    p(4 * k + 1) = std::hypot(c(2 * k), c(2 * k + 1));
    p(4 * k + 2) = seeds[k].decay;
    p(4 * k + 3) = std::atan2(-c(2 * k + 1), c(2 * k));
  }
  p(4 * n) = c(2 * n);
  p(4 * n + 1) = c(2 * n + 1);
  return p;
}

std::vector<double> detrended(const std::vector<double>& t, const std::vector<double>& y) {
  const auto m = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = t[i];
    b(i) = y[i];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  std::vector<double> z(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) z[i] = y[i] - c(0) - c(1) * t[i];
  return z;
}

// Matrix-pencil poles of order 2N + 2 (N oscillations plus the linear
// background's double pole at z = 1). Returns oscillatory poles only.
std::vector<Seed> pencil_seeds(const std::vector<double>& t, const std::vector<double>& y, int n) {
  const auto len = static_cast<Eigen::Index>(y.size());
  const Eigen::Index order = 2 * n + 2;
  const Eigen::Index pencil = len / 3;
  if (pencil <= order || len - pencil <= order) return {};
  const double dt = t[1] - t[0];
  Eigen::MatrixXd h(len - pencil, pencil + 1);
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) h(r, c) = y[r + c];
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinV);
  const Eigen::MatrixXd v = svd.matrixV().leftCols(order);
  const Eigen::MatrixXd v1 = v.topRows(pencil);
  const Eigen::MatrixXd v2 = v.bottomRows(pencil);
  const Eigen::MatrixXd g = (v1.transpose() * v1).ldlt().solve(v1.transpose() * v2);
  Eigen::EigenSolver<Eigen::MatrixXd> es(g.transpose());
  std::vector<Seed> seeds;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (z.imag() <= 0.0) continue;
    const double f = std::arg(z) / (kTwoPi * dt);
    const double decay = -std::log(std::abs(z)) / dt;
    if (f <= 0.0 || !std::isfinite(decay)) continue;
    seeds.push_back({f, std::max(decay, 0.0)});
  }
  if (static_cast<int>(seeds.size()) < n) return {};
  if (static_cast<int>(seeds.size()) > n) {
    // Keep the N strongest by linear amplitude.
    const Eigen::VectorXd p = linear_start(t, y, seeds);
    std::vector<std::size_t> order_idx(seeds.size());
    for (std::size_t i = 0; i < order_idx.size(); ++i) order_idx[i] = i;
    std::stable_sort(order_idx.begin(), order_idx.end(), [&](std::size_t a, std::size_t b) {
      return p(4 * a + 1) > p(4 * b + 1);
    });
    std::vector<Seed> kept;
    for (int i = 0; i < n; ++i) kept.push_back(seeds[order_idx[i]]);
    seeds = kept;
  }
  return seeds;
}

void combinations(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

RabiComponentFit to_fit(const Eigen::VectorXd& p, const Eigen::VectorXd& err, double rss,
                        std::size_t npts, double span, double dt) {
  const double fs = 1.0 / dt;
  const Eigen::Index n = (p.size() - 2) / 4;
  RabiComponentFit fit;
  for (Eigen::Index k = 0; k < n; ++k) {
    RabiComponent c;
    c.frequency_mhz = p(4 * k);
    c.amplitude = p(4 * k + 1);
    c.decay_rate = p(4 * k + 2);
    c.phase_rad = p(4 * k + 3);
    if (c.amplitude < 0.0) {
      c.amplitude = -c.amplitude;
      c.phase_rad += std::numbers::pi;
    }
    // On a uniform grid f and f + k fs are indistinguishable; report baseband.
    c.frequency_mhz -= fs * std::floor(c.frequency_mhz / fs);
    if (c.frequency_mhz > 0.5 * fs) {
      c.frequency_mhz = fs - c.frequency_mhz;
      c.phase_rad = -c.phase_rad;
    }
    c.phase_rad = std::remainder(c.phase_rad, kTwoPi);
    c.frequency_err = err(4 * k);
    c.amplitude_err = err(4 * k + 1);
    c.decay_err = err(4 * k + 2);
    c.phase_err = err(4 * k + 3);
    fit.components.push_back(c);
  }
  std::sort(fit.components.begin(), fit.components.end(),
            [](const RabiComponent& a, const RabiComponent& b) { return a.frequency_mhz < b.frequency_mhz; });
  fit.intercept = p(p.size() - 2);
  fit.slope = p(p.size() - 1);
  fit.rss = rss;
  fit.residual_rms = std::sqrt(rss / static_cast<double>(npts));
  fit.aicc = aicc(rss, npts, static_cast<std::size_t>(p.size()));
  const double resolution = 1.0 / (2.0 * span);
  for (std::size_t i = 1; i < fit.components.size(); ++i) {
    if (fit.components[i].frequency_mhz - fit.components[i - 1].frequency_mhz < resolution) {
      fit.degenerate = true;
    }
  }
  return fit;
}

}  // namespace

std::vector<double> RabiComponentFit::frequencies() const {
  std::vector<double> f;
  for (const auto& c : components) f.push_back(c.frequency_mhz);
  return f;
}

double RabiComponentFit::evaluate_component(std::size_t i, double t) const {
  const auto& c = components.at(i);
  return c.amplitude * std::exp(-c.decay_rate * t) * std::cos(kTwoPi * c.frequency_mhz * t + c.phase_rad);
}

double RabiComponentFit::evaluate(double t) const {
  double y = intercept + slope * t;
  for (std::size_t i = 0; i < components.size(); ++i) y += evaluate_component(i, t);
  return y;
}

double aicc(double rss, std::size_t n, std::size_t k) {
  if (n <= k + 1) return std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  const double r = std::max(rss, std::numeric_limits<double>::min());
  return nn * std::log(r / nn) + 2.0 * kk + 2.0 * kk * (kk + 1.0) / (nn - kk - 1.0);
}

std::vector<double> fourier_peaks(const RabiTrace& trace, std::size_t count, int oversample) {
  trace.validate();
  const auto& t = trace.time_us;
  const std::vector<double> z = detrended(t, trace.signal);
  const double dt = t[1] - t[0];
  const std::size_t bins = t.size() * static_cast<std::size_t>(std::max(oversample, 1));
  const double df = 1.0 / (static_cast<double>(bins) * dt);
  const std::size_t half = bins / 2;
  std::vector<double> mag(half + 1);
  for (std::size_t b = 0; b <= half; ++b) {
    const double w = kTwoPi * df * static_cast<double>(b);
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double ti = t[i] - t[0];
      re += z[i] * std::cos(w * ti);
      im -= z[i] * std::sin(w * ti);
    }
    mag[b] = std::hypot(re, im);
  }
  std::vector<std::size_t> peaks;
  for (std::size_t b = 1; b < half; ++b) {
    if (mag[b] > mag[b - 1] && mag[b] >= mag[b + 1]) peaks.push_back(b);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
  std::vector<double> out;
  for (std::size_t i = 0; i < peaks.size() && out.size() < count; ++i) {
    // Parabolic interpolation of the peak position.
    const std::size_t b = peaks[i];
    const double l = mag[b - 1], c = mag[b], r = mag[b + 1];
    const double denom = l - 2.0 * c + r;
    const double shift = denom != 0.0 ? 0.5 * (l - r) / denom : 0.0;
    out.push_back(df * (static_cast<double>(b) + shift));
  }
  return out;
}

RabiComponentFit fit_rabi(const RabiTrace& trace, int n_components, const RabiFitOptions& options) {
  trace.validate();
  if (n_components < 1) throw std::invalid_argument("fit_rabi: need at least one component");
  const std::size_t k = 4 * static_cast<std::size_t>(n_components) + 2;
  if (trace.time_us.size() < k + 2) {
    throw std::invalid_argument("fit_rabi: trace too short for " + std::to_string(n_components) +
                                " components");
  }
  const auto& t = trace.time_us;
  const auto& y = trace.signal;
  const double span = t.back() - t.front();
  const double decay0 = 2.0 / span;

  std::vector<std::vector<Seed>> starts;
  const auto freqs = fourier_peaks(trace, static_cast<std::size_t>(n_components + options.extra_seeds),
                                   options.dft_oversample);
  if (freqs.size() >= static_cast<std::size_t>(n_components)) {
    std::vector<std::vector<std::size_t>> combos;
    std::vector<std::size_t> cur;
    combinations(freqs.size(), static_cast<std::size_t>(n_components), 0, cur, combos);
    for (const auto& c : combos) {
      std::vector<Seed> s;
      for (std::size_t i : c) s.push_back({freqs[i], decay0});
      starts.push_back(s);
    }
  } else {
    // Not enough spectral structure: spread seeds over the lower band.
    std::vector<Seed> s;
    const double nyq = 0.5 / (t[1] - t[0]);
    for (int i = 0; i < n_components; ++i) s.push_back({nyq * (i + 1) / (4.0 * n_components), decay0});
    starts.push_back(s);
  }
  if (auto p = pencil_seeds(t, y, n_components); !p.empty()) starts.push_back(p);

  auto rfun = [&](const Eigen::VectorXd& p) { return residual(t, y, p); };
  auto jfun = [&](const Eigen::VectorXd& p) { return jacobian(t, p); };
  bool have = false;
  LmResult best;
  LmResult best_any;
  best_any.rss = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    const Eigen::VectorXd x0 = linear_start(t, y, s);
    if (!x0.allFinite()) continue;
    LmResult r = levenberg_marquardt(rfun, jfun, x0, options.lm);
    if (!std::isfinite(r.rss)) continue;
    if (r.rss < best_any.rss) best_any = r;
    if (r.converged && (!have || r.rss < best.rss)) {
      best = r;
      have = true;
    }
  }
  if (!have) {
    std::vector<double> params;
    double rms = std::numeric_limits<double>::infinity();
    if (best_any.params.size() > 0) {
      params.assign(best_any.params.data(), best_any.params.data() + best_any.params.size());
      rms = std::sqrt(best_any.rss / static_cast<double>(t.size()));
    }
    throw FitError("fit_rabi: no start converged for N = " + std::to_string(n_components), params, rms);
  }
  RabiComponentFit fit = to_fit(best.params, standard_errors(best), best.rss, t.size(), span, t[1] - t[0]);
  fit.iterations = best.iterations;
  return fit;
}

RabiComponentFit select_components(const RabiTrace& trace, int n_max, const RabiFitOptions& options) {
  if (n_max < 1) throw std::invalid_argument("select_components: n_max must be >= 1");
  std::vector<ModelScore> scores;
  std::optional<RabiComponentFit> best;
  double mean = 0.0, sum_sq_dev = 0.0;
  for (double y : trace.signal) mean += y;
  mean /= static_cast<double>(trace.signal.size());
  for (double y : trace.signal) sum_sq_dev += (y - mean) * (y - mean);
  for (int n = 1; n <= n_max; ++n) {
    ModelScore s;
    s.n = n;
    try {
      RabiComponentFit f = fit_rabi(trace, n, options);
      s.rss = f.rss;
      for (const auto& c : f.components) {
        if (n > 1 && c.amplitude < options.min_amplitude_snr * c.amplitude_err) s.insignificant = true;
      }
      s.aicc = s.insignificant ? std::numeric_limits<double>::infinity() : f.aicc;
      // Residual at round-off: the information criterion has nothing left to compare.
      const bool exact = !s.insignificant && f.rss <= 1e-20 * sum_sq_dev;
      if (!s.insignificant && (!best || f.aicc < best->aicc || exact)) best = std::move(f);
      if (exact) {
        scores.push_back(s);
        break;
      }
    } catch (const FitError&) {
      s.failed = true;
      s.aicc = std::numeric_limits<double>::infinity();
      s.rss = std::numeric_limits<double>::infinity();
    } catch (const std::invalid_argument&) {
      if (n == 1) throw;
      s.failed = true;
      s.aicc = std::numeric_limits<double>::infinity();
      s.rss = std::numeric_limits<double>::infinity();
    }
    scores.push_back(s);
  }
  if (!best) throw FitError("select_components: every candidate N failed", {}, 0.0);
  best->scores = std::move(scores);
  return *best;
}

}  // namespace pdmr

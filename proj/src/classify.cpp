#include "pdmr/classify.hpp"

#include <cmath>
#include <stdexcept>

namespace pdmr {

const char* to_string(DriveAxis a) {
  switch (a) {
    case DriveAxis::XDriven: return "x_driven";
    case DriveAxis::YDriven: return "y_driven";
    case DriveAxis::Unknown: return "unknown";
  }
  return "?";
}

PowerLawFit fit_power_law(const std::vector<double>& powers, const std::vector<double>& values) {
  if (powers.size() != values.size() || powers.size() < 2) {
    throw std::invalid_argument("fit_power_law: need at least two matching points");
  }
  const auto n = static_cast<Eigen::Index>(powers.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(powers[i] > 0.0) || !(values[i] > 0.0)) {
      throw std::invalid_argument("fit_power_law: powers and values must be > 0");
    }
    a(i, 0) = 1.0;
    a(i, 1) = std::log(powers[i]);
    b(i) = std::log(values[i]);
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  PowerLawFit out;
  out.prefactor = std::exp(c(0));
  out.exponent = c(1);
  if (n > 2) {
    const double s2 = (a * c - b).squaredNorm() / static_cast<double>(n - 2);
    const Eigen::Matrix2d cov = (a.transpose() * a).inverse() * s2;
    out.exponent_err = std::sqrt(std::max(0.0, cov(1, 1)));
  }
  return out;
}

DriveAxis classify_point(const std::vector<double>& v, const ClassifyOptions& o) {
  if (v.size() == 3) {
    const double s1 = v[1] - v[0], s2 = v[2] - v[1];
    const double mean = 0.5 * (s1 + s2);
    if (mean > 0.0 && std::abs(s2 - s1) <= o.spacing_tol * mean) return DriveAxis::XDriven;
  } else if (v.size() == 2) {
    if (v[0] > 0.0 && std::abs(v[1] / v[0] - 2.0) <= o.ratio_tol) return DriveAxis::YDriven;
  }
  return DriveAxis::Unknown;
}

Classification classify_transition(const std::vector<PowerPoint>& series, const ClassifyOptions& o) {
  if (series.size() < 3) throw std::invalid_argument("classify_transition: need >= 3 power points");
  Classification out;
  int x = 0, y = 0;
  for (const auto& p : series) {
    const DriveAxis a = classify_point(p.fit.frequencies(), o);
    out.per_point.push_back(a);
    x += a == DriveAxis::XDriven;
    y += a == DriveAxis::YDriven;
  }
  const int half = static_cast<int>(series.size()) / 2;
  DriveAxis majority = DriveAxis::Unknown;
  if (x > half) majority = DriveAxis::XDriven;
  if (y > half) majority = DriveAxis::YDriven;
  if (majority == DriveAxis::Unknown) {
    out.reason = "no pattern holds at a majority of power points";
    return out;
  }

  const std::size_t n = series.front().fit.components.size();
  for (const auto& p : series) {
    if (p.fit.components.size() != n) {
      out.reason = "component count varies with power";
      return out;
    }
  }
  std::vector<double> powers;
  for (const auto& p : series) powers.push_back(p.mw_power);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> f;
    for (const auto& p : series) f.push_back(p.fit.components[k].frequency_mhz);
    out.exponents.push_back(fit_power_law(powers, f));
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(out.exponents[k].exponent - o.expected_exponent) > o.exponent_tol) {
      out.reason = "component " + std::to_string(k) + " power exponent " +
                   std::to_string(out.exponents[k].exponent) + " violates the square-root law";
      return out;
    }
  }
  out.verdict = majority;
  out.reason = majority == DriveAxis::XDriven ? "equally spaced triplet" : "1:2 doublet";
  return out;
}

}  // namespace pdmr

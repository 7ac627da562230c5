#include "pdmr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pdmr {

namespace {

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

DefectOrientation orientation_at(std::string label, double azimuth_deg, double polar_deg) {
  const double p = deg2rad(azimuth_deg);
  const double t = deg2rad(polar_deg);
  DefectOrientation o;
  o.label = std::move(label);
  o.azimuth_deg = azimuth_deg;
  o.z = Vec3(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
  o.y = Vec3(-std::sin(p), std::cos(p), 0.0);
  o.x = o.y.cross(o.z);
  return o;
}

std::vector<DefectOrientation> basal_orientations() {
  const double unprimed = kBasalAzimuthOffsetDeg + 60.0;
  const double primed = kBasalAzimuthOffsetDeg;
  return {
      orientation_at("a", unprimed),
      orientation_at("b", unprimed + 120.0),
      orientation_at("c", unprimed + 240.0),
      orientation_at("a'", primed),
      orientation_at("b'", primed + 120.0),
      orientation_at("c'", primed + 240.0),
  };
}

DefectOrientation axial_orientation() {
  DefectOrientation o;
  o.label = "axial";
  o.azimuth_deg = 0.0;
  o.x = Vec3::UnitX();
  o.y = Vec3::UnitY();
  o.z = Vec3::UnitZ();
  return o;
}

MwField MwField::tilted(double b1_mhz, double elevation_deg, double misalignment_deg) {
  if (!(b1_mhz >= 0.0)) throw std::invalid_argument("MwField: b1 must be >= 0");
  const double el = deg2rad(elevation_deg);
  const double mis = deg2rad(misalignment_deg);
  Vec3 dir(std::cos(el) * std::cos(mis), std::cos(el) * std::sin(mis), std::sin(el));
  if (misalignment_deg == 0.0) dir.y() = 0.0;
  return MwField(b1_mhz, dir);
}

MwField MwField::from_direction(double b1_mhz, const Vec3& direction) {
  if (!(b1_mhz >= 0.0)) throw std::invalid_argument("MwField: b1 must be >= 0");
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("MwField: direction must be unit norm");
  }
  if (direction.y() != 0.0) {
    throw std::invalid_argument("MwField: direction must have no [1-100] component");
  }
  return MwField(b1_mhz, direction);
}

MwField MwField::scaled(double factor) const {
  if (!(factor >= 0.0)) throw std::invalid_argument("MwField: scale factor must be >= 0");
  return MwField(b1_ * factor, dir_);
}

std::vector<Multiplet> distinct_values(const std::vector<double>& values, double rel_tol) {
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  const double tol = rel_tol * scale;
  std::vector<Multiplet> out;
  for (double x : v) {
    if (!out.empty() && std::abs(x - out.back().value) <= tol) {
      // Running mean keeps the merged value centred in its cluster.
      auto& m = out.back();
      m.value = (m.value * m.count + x) / (m.count + 1);
      ++m.count;
    } else {
      out.push_back({x, 1});
    }
  }
  return out;
}

bool is_equally_spaced_triplet(const std::vector<Multiplet>& m, double rel_tol) {
  if (m.size() != 3) return false;
  const double s1 = m[1].value - m[0].value;
  const double s2 = m[2].value - m[1].value;
  const double mean = 0.5 * (s1 + s2);
  return mean > 0.0 && std::abs(s2 - s1) <= rel_tol * mean;
}

bool is_one_to_two_doublet(const std::vector<Multiplet>& m, double rel_tol) {
  if (m.size() != 2 || !(m[0].value > 0.0)) return false;
  return std::abs(m[1].value / m[0].value - 2.0) <= rel_tol * 2.0;
}

CouplingSet rabi_couplings(const MwField& field,
                           const std::vector<DefectOrientation>& orientations) {
  CouplingSet out;
  const Vec3& b = field.direction();
  const double b1 = field.b1_mhz();
  std::vector<double> wx;
  for (const auto& o : orientations) {
    OrientationCoupling c{o.label, b1 * std::abs(b.dot(o.x)), b1 * std::abs(b.dot(o.y)),
                          b1 * std::abs(b.dot(o.z))};
    wx.push_back(c.omega_x);
    out.couplings.push_back(std::move(c));
  }
  if (orientations.size() > 1 && b1 > 0.0) {
    double mean = 0.0;
    for (double w : wx) mean += w;
    mean /= static_cast<double>(wx.size());
    const auto d = distinct_values(wx, 1e-9);
    double min_spacing = d.size() < 3 ? 0.0 : mean;
    for (std::size_t i = 1; i < d.size(); ++i) {
      min_spacing = std::min(min_spacing, d[i].value - d[i - 1].value);
    }
    if (min_spacing < 0.01 * mean) {
      out.warnings.push_back(
          "omega_x multiplet is nearly degenerate: field [0001] component too small to "
          "separate the three x-driven Rabi frequencies");
    }
  }
  return out;
}

}  // namespace pdmr

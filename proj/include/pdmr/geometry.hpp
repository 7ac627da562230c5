#pragma once

// Crystal-frame vector math for defect orientations in 4H-SiC.
//
// Lab frame: x || [11-20], y || [1-100], z || [0001]. The microwave antenna
// runs along y, so its field lies in the x-z plane.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pdmr {

using Vec3 = Eigen::Vector3d;

/// Polar angle of a basal Si-C bond measured from [0001] (ideal tetrahedron).
inline constexpr double kBondPolarAngleDeg = 109.471;

/// Azimuth offset of the primed orientations from x_lab. The unprimed set sits
/// 60 degrees further round.
inline constexpr double kBasalAzimuthOffsetDeg = 30.0;

struct DefectOrientation {
  std::string label;
  double azimuth_deg;
  Vec3 x;
  Vec3 y;
  Vec3 z;
};

/// The six symmetry-equivalent basal orientations a, b, c (azimuths 90, 210,
/// 330) and a', b', c' (30, 150, 270).
std::vector<DefectOrientation> basal_orientations();

/// Principal frame for an azimuth phi and polar angle theta:
///   z = (sin t cos p, sin t sin p, cos t), y = (-sin p, cos p, 0), x = y cross z.
DefectOrientation orientation_at(std::string label, double azimuth_deg,
                                 double polar_deg = kBondPolarAngleDeg);

/// c-axis defect: z || [0001], x || [11-20], y || [1-100].
DefectOrientation axial_orientation();

/// Microwave drive field. b1 is the coupling scale in MHz (population Rabi
/// frequency for a unit projection).
class MwField {
 public:
  /// Direction elevated by `elevation_deg` from x_lab toward z_lab, optionally
  /// rotated about z_lab by `misalignment_deg` (antenna not exactly along y).
  static MwField tilted(double b1_mhz, double elevation_deg = 45.0,
                        double misalignment_deg = 0.0);

  /// Explicit direction. Must be unit norm with no y_lab component.
  static MwField from_direction(double b1_mhz, const Vec3& direction);

  double b1_mhz() const { return b1_; }
  const Vec3& direction() const { return dir_; }

  MwField scaled(double factor) const;

 private:
  MwField(double b1, Vec3 dir) : b1_(b1), dir_(std::move(dir)) {}
  double b1_;
  Vec3 dir_;
};

struct OrientationCoupling {
  std::string label;
  double omega_x;
  double omega_y;
  double omega_z;
};

struct CouplingSet {
  std::vector<OrientationCoupling> couplings;
  std::vector<std::string> warnings;
};

/// Projections of the field onto each orientation's principal axes, scaled by
/// b1 (absolute values). Warns when the omega_x triplet is close to collapsing.
CouplingSet rabi_couplings(const MwField& field,
                           const std::vector<DefectOrientation>& orientations);

/// A distinct value in a multiset together with how often it occurred.
struct Multiplet {
  double value;
  int count;
};

/// Sorted distinct values, merging entries within `rel_tol` of each other
/// (relative to the largest magnitude in the set).
std::vector<Multiplet> distinct_values(const std::vector<double>& values, double rel_tol = 1e-9);

/// Three distinct values with v2 - v1 == v3 - v2 within `rel_tol`.
bool is_equally_spaced_triplet(const std::vector<Multiplet>& m, double rel_tol);

/// Two distinct values with v2 / v1 == 2 within `rel_tol`.
bool is_one_to_two_doublet(const std::vector<Multiplet>& m, double rel_tol);

}  // namespace pdmr

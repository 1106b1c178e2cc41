#pragma once

#include <array>
#include <utility>

#include "reconfmag/types.hpp"

namespace reconfmag {

// Planar slider-rocker linkage in the vertical plane of one coil. The slider
// point S = s * slider_axis drives B = S + slider_offset_B; C closes the
// triangle with the rocker pivot D; the coil direction is DC rotated by alpha.
struct LinkageGeometry {
  Vec2 slider_axis{0.0, 1.0};
  Vec2 point_A{0.060, 0.0};
  Vec2 point_D{0.060, 0.010};
  double len_BC = 0.040;
  double len_CD = 0.025;
  double len_DE = 0.055;
  Vec2 slider_offset_B{0.035, 0.0};
  double alpha = kPi / 3.0;
  double s_min = 0.0035;
  double s_max = 0.018;

  // Checks lengths, the slider range and that theta(s) is solvable and
  // strictly monotone on a dense sample of the range.
  void validate() const;
};

struct MechanismState {
  double s = 0.0;
  double psi = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  Vec2 point_B = Vec2::Zero();
  Vec2 point_C = Vec2::Zero();
  Vec2 point_E = Vec2::Zero();
};

// Solves the linkage without range checks; throws MechanismError when the two
// circles have no real intersection.
MechanismState solve_linkage(const LinkageGeometry& geom, double s);

MechanismState forward_kinematics(const LinkageGeometry& geom, double s);

// Bisection on the monotone branch; the result satisfies the forward map to
// the precision of double arithmetic.
double inverse_kinematics(const LinkageGeometry& geom, double theta);

// Attainable [theta_min, theta_max] over the slider range.
std::pair<double, double> theta_bounds(const LinkageGeometry& geom);

struct CoilPose {
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();  // unit, points from the coil into the workspace
  Vec3 xdir = Vec3::UnitX();  // unit, perpendicular to axis; radial fallback
  int azimuth_index = 0;
};

std::array<CoilPose, 3> coil_poses(double theta, double mount_radius, double mount_height);

// Where the coil sits for a given tilt. The coil rotates about a hinge at
// (pivot_radius, pivot_height) in its vertical plane; its centre lies
// axial_offset along the coil axis from the hinge.
struct MountModel {
  double pivot_radius = 0.100;
  double pivot_height = -0.120;
  double axial_offset = 0.040;

  double radius(double theta) const;
  double height(double theta) const;
};

std::array<CoilPose, 3> coil_poses(double theta, const MountModel& mount);

// Upper bound of the collision-free workspace. The model is affine in theta:
// z_limit = z_ref - tip_extent * (theta - theta_ref). tip_extent is the
// effective length of coil hardware that swings downward as the group tilts;
// zero extent gives a constant limit.
struct ClearanceModel {
  double z_ref = -0.17;
  double theta_ref = deg2rad(35.0);
  double tip_extent = 0.02 / deg2rad(10.0);
};

double z_limit(double theta, const ClearanceModel& model);

}  // namespace reconfmag

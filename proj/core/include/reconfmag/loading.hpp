#pragma once

#include <utility>
#include <vector>

#include "reconfmag/actuation.hpp"
#include "reconfmag/types.hpp"

namespace reconfmag {

struct FieldCommand {
  double B0 = 1e-3;     // T
  double alpha = 0.0;   // azimuth, rad
  double epsilon = 0.0; // elevation, rad

  Vec3 direction() const;
};

struct RotatingFieldSpec {
  Vec3 axis = Vec3::UnitX();
  double B0 = 1e-3;              // T
  int phase_samples = 72;
  double dipole_moment = 1e-4;   // A m^2
  double phase_offset = 0.0;     // rad, shifts every phase sample

  void validate() const;
};

// Orthonormal pair spanning the plane normal to n. e1 = z x n normalised, or
// x when n is (anti)parallel to z; e2 = n x e1.
std::pair<Vec3, Vec3> rotation_plane_basis(const Vec3& n);

CurrentVector synthesize_tracking_currents(const FieldSample& s, const FieldCommand& cmd,
                                           double I_max);

// ||sum_k i_k G_k||_F for the currents that realise the command (T/m).
double gradient_disturbance(const FieldSample& s, const FieldCommand& cmd, double I_max);

// Mean of gradient_disturbance over n_alpha uniformly spaced azimuths.
double azimuth_average(const FieldSample& s, double epsilon, double B0, double I_max, int n_alpha);

struct CycleForce {
  Vec3 F_bar = Vec3::Zero();  // N
  double F_z = 0.0;           // N
};

// Phase-locked dipole force (grad B)^T m averaged over one field revolution
// with the midpoint rule.
CycleForce cycle_average_force(const FieldSample& s, const RotatingFieldSpec& spec, double I_max);

// Model-level conveniences evaluating A and G first.
double gradient_disturbance(const FieldModel& model, const Vec3& p, double theta,
                            const FieldCommand& cmd, double I_max);
double azimuth_average(const FieldModel& model, const Vec3& p, double theta, double epsilon,
                       double B0, double I_max, int n_alpha);
CycleForce cycle_average_force(const FieldModel& model, const Vec3& p, double theta,
                               const RotatingFieldSpec& spec, double I_max);

// F_z along the axis x = y = 0 for each requested z.
std::vector<std::pair<double, double>> lift_depth_profile(const FieldModel& model, double theta,
                                                          const RotatingFieldSpec& spec,
                                                          const std::vector<double>& zs,
                                                          double I_max);

}  // namespace reconfmag

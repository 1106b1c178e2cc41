#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "reconfmag/library.hpp"
#include "reconfmag/types.hpp"

namespace reconfmag {

struct FeasibilitySpec {
  double I_max = 5.0;     // A
  double B_req = 1e-3;    // T
  int sphere_samples = 512;

  void validate() const;
};

// u = |A i|^2 / (2 mu0), J/m^3
double energy_density(const Mat3& A, const Vec3& i);

// Golden-angle lattice of n quasi-uniform unit vectors (z from +1 to -1).
std::vector<Vec3> fibonacci_sphere(int n);

// Largest field along u reachable with |i_k| <= I_max: I_max * ||A^T u||_1.
double directional_max_field(const Mat3& A, const Vec3& u, double I_max);

double b_min(const Mat3& A, const FeasibilitySpec& spec);
double b_min(const Mat3& A, const std::vector<Vec3>& directions, double I_max);

// Exact minimum over all unit directions, I_max / max_k |row k of A^-1|
// (0 for singular A). The sampled estimate never falls below it.
double b_min_exact(const Mat3& A, double I_max);

// Convex hull volume; 0 for fewer than 4 affinely independent points.
double hull_volume(const std::vector<Vec3>& points);

struct WorkspaceReport {
  double theta = 0.0;
  std::vector<Vec3> nodes;
  std::vector<double> b_min;           // NaN at invalid nodes
  std::vector<std::uint8_t> feasible;  // 1 iff b_min >= B_req
  std::size_t feasible_count = 0;
  double hull_volume = 0.0;
  // (z, log10 u) on the axis x = y = 0 with every coil at 1 A.
  std::vector<std::pair<double, double>> energy_depth_profile;
};

WorkspaceReport feasible_workspace(const FieldLibrary& lib, double theta,
                                   const FeasibilitySpec& spec);

}  // namespace reconfmag

#include "reconfmag/workspace.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "reconfmag/error.hpp"

namespace reconfmag {

void FeasibilitySpec::validate() const {
  if (!(I_max > 0.0)) throw ConfigError("feasibility: I_max must be positive");
  if (!(B_req >= 0.0)) throw ConfigError("feasibility: B_req must be non-negative");
  if (sphere_samples < 64) throw ConfigError("feasibility: sphere_samples must be >= 64");
}

double energy_density(const Mat3& A, const Vec3& i) { return (A * i).squaredNorm() / (2.0 * kMu0); }

std::vector<Vec3> fibonacci_sphere(int n) {
  if (n < 1) throw ContractError("fibonacci_sphere: n must be positive");
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double ph = golden * k;
    out[static_cast<std::size_t>(k)] = Vec3(rho * std::cos(ph), rho * std::sin(ph), z);
  }
  return out;
}

double directional_max_field(const Mat3& A, const Vec3& u, double I_max) {
  if (std::abs(u.norm() - 1.0) > 1e-12)
    throw ContractError("directional_max_field: direction must be a unit vector");
  return I_max * (A.transpose() * u).lpNorm<1>();
}

double b_min(const Mat3& A, const std::vector<Vec3>& dirs, double I_max) {
  double best = std::numeric_limits<double>::infinity();
  const Mat3 At = A.transpose();
  for (const Vec3& u : dirs) best = std::min(best, (At * u).lpNorm<1>());
  return I_max * best;
}

double b_min_exact(const Mat3& A, double I_max) {
  // The l1 unit ball's extreme points are +-e_k, so the largest |A^-T v| over
  // it is the largest column norm of A^-T.
  Eigen::FullPivLU<Mat3> lu(A);
  if (!lu.isInvertible()) return 0.0;
  const Mat3 inv = lu.inverse();
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) worst = std::max(worst, inv.row(k).norm());
  return I_max / worst;
}

double b_min(const Mat3& A, const FeasibilitySpec& spec) {
  return b_min(A, fibonacci_sphere(spec.sphere_samples), spec.I_max);
}

WorkspaceReport feasible_workspace(const FieldLibrary& lib, double theta,
                                   const FeasibilitySpec& spec) {
  spec.validate();
  const std::size_t t = lib.theta_index(theta);
  const ThetaGrid& g = lib.grids()[t];
  const auto dirs = fibonacci_sphere(spec.sphere_samples);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  WorkspaceReport rep;
  rep.theta = g.theta;
  rep.nodes.reserve(g.node_count());
  rep.b_min.assign(g.node_count(), nan);
  rep.feasible.assign(g.node_count(), 0);

  // Feasible extreme z per (x, y) column: the hull of these equals the hull
  // of all feasible nodes and is far cheaper to build.
  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>> columns;
  const std::size_t ixc = g.nx / 2, iyc = g.ny / 2;
  const bool axis_on_grid = std::abs(g.node(ixc, iyc, 0).x()) < 1e-12 &&
                            std::abs(g.node(ixc, iyc, 0).y()) < 1e-12;
  const Vec3 ones(1.0, 1.0, 1.0);

  for (std::size_t iz = 0; iz < g.nz; ++iz)
    for (std::size_t iy = 0; iy < g.ny; ++iy)
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        const std::size_t node = g.index(ix, iy, iz);
        rep.nodes.push_back(g.node(ix, iy, iz));
        if (!lib.valid(t, node)) continue;
        const FieldSample s = lib.node_sample(t, node);
        const double bm = b_min(s.A, dirs, spec.I_max);
        rep.b_min[node] = bm;
        if (bm >= spec.B_req) {
          rep.feasible[node] = 1;
          ++rep.feasible_count;
          auto [it, fresh] = columns.try_emplace({ix, iy}, iz, iz);
          if (!fresh) it->second.second = iz;
        }
        if (axis_on_grid && ix == ixc && iy == iyc)
          rep.energy_depth_profile.emplace_back(rep.nodes.back().z(),
                                                std::log10(energy_density(s.A, ones)));
      }

  // Hull in integer index space (exact coordinates), scaled afterwards.
  std::vector<Vec3> pts;
  for (const auto& [xy, zr] : columns) {
    pts.emplace_back(static_cast<double>(xy.first), static_cast<double>(xy.second),
                     static_cast<double>(zr.first));
    if (zr.second != zr.first)
      pts.emplace_back(static_cast<double>(xy.first), static_cast<double>(xy.second),
                       static_cast<double>(zr.second));
  }
  rep.hull_volume = hull_volume(pts) * g.spacing * g.spacing * g.spacing;
  return rep;
}

}  // namespace reconfmag

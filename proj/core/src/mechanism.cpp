#include "reconfmag/mechanism.hpp"

#include <cmath>
#include <sstream>

#include "reconfmag/error.hpp"

namespace reconfmag {

Mat3 c3_rotation(int k) {
  k = ((k % 3) + 3) % 3;
  const double c = k == 0 ? 1.0 : -0.5;
  const double s = k == 0 ? 0.0 : (k == 1 ? 1.0 : -1.0) * std::sqrt(3.0) / 2.0;
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

MechanismState solve_linkage(const LinkageGeometry& g, double s) {
  const Vec2 B = s * g.slider_axis + g.slider_offset_B;
  const Vec2 D = g.point_D;
  const Vec2 BD = D - B;
  const double d = BD.norm();
  const double r1 = g.len_BC;
  const double r2 = g.len_CD;
  if (d == 0.0 || d > r1 + r2 || d < std::abs(r1 - r2)) {
    std::ostringstream os;
    os << "mechanism locked at s=" << s << " (|BD|=" << d << ")";
    throw MechanismError(os.str());
  }
  const double a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  const double h = std::sqrt(std::max(0.0, r1 * r1 - a * a));
  const Vec2 ex = BD / d;
  const Vec2 ey(-ex.y(), ex.x());
  const Vec2 mid = B + a * ex;
  const Vec2 c1 = mid + h * ey;
  const Vec2 c2 = mid - h * ey;
  // Elbow-up assembly: the intersection with the larger vertical coordinate.
  const Vec2 C = c1.y() >= c2.y() ? c1 : c2;

  MechanismState st;
  st.s = s;
  st.point_B = B;
  st.point_C = C;
  st.psi = std::atan2(C.y() - D.y(), C.x() - D.x());
  st.phi = st.psi + g.alpha;
  st.theta = std::abs(st.phi - kPi / 2.0);
  st.point_E = D + g.len_DE * Vec2(std::cos(st.phi), std::sin(st.phi));
  return st;
}

MechanismState forward_kinematics(const LinkageGeometry& g, double s) {
  if (!(s >= g.s_min && s <= g.s_max)) {
    std::ostringstream os;
    os << "slider position s=" << s << " outside [" << g.s_min << ", " << g.s_max << "]";
    throw MechanismError(os.str());
  }
  return solve_linkage(g, s);
}

std::pair<double, double> theta_bounds(const LinkageGeometry& g) {
  const double a = solve_linkage(g, g.s_min).theta;
  const double b = solve_linkage(g, g.s_max).theta;
  return {std::min(a, b), std::max(a, b)};
}

double inverse_kinematics(const LinkageGeometry& g, double theta) {
  double lo = g.s_min;
  double hi = g.s_max;
  const double tlo = solve_linkage(g, lo).theta;
  const double thi = solve_linkage(g, hi).theta;
  const double tmin = std::min(tlo, thi);
  const double tmax = std::max(tlo, thi);
  if (!(theta >= tmin && theta <= tmax)) {
    std::ostringstream os;
    os << "theta=" << rad2deg(theta) << " deg unreachable; attainable range [" << rad2deg(tmin)
       << ", " << rad2deg(tmax) << "] deg";
    throw MechanismError(os.str());
  }
  const bool increasing = thi > tlo;
  // Bisect until the bracket stops shrinking in double precision.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double tm = solve_linkage(g, mid).theta;
    if ((tm < theta) == increasing)
      lo = mid;
    else
      hi = mid;
  }
  const double elo = std::abs(solve_linkage(g, lo).theta - theta);
  const double ehi = std::abs(solve_linkage(g, hi).theta - theta);
  return elo <= ehi ? lo : hi;
}

void LinkageGeometry::validate() const {
  if (!(len_BC > 0.0 && len_CD > 0.0 && len_DE > 0.0))
    throw ConfigError("linkage: link lengths must be positive");
  if (!(s_max > s_min)) throw ConfigError("linkage: s_range must be non-empty (s_min < s_max)");
  if (std::abs(slider_axis.norm() - 1.0) > 1e-9)
    throw ConfigError("linkage: slider_axis must be a unit vector");
  constexpr int n = 400;
  double prev = 0.0;
  int sign = 0;
  for (int i = 0; i <= n; ++i) {
    const double s = s_min + (s_max - s_min) * i / n;
    double th;
    try {
      th = solve_linkage(*this, s).theta;
    } catch (const MechanismError& e) {
      throw ConfigError(std::string("linkage: ") + e.what());
    }
    if (i > 0) {
      const double d = th - prev;
      const int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
      if (sg == 0 || (sign != 0 && sg != sign))
        throw ConfigError("linkage: theta(s) is not strictly monotone over s_range");
      sign = sg;
    }
    prev = th;
  }
}

double MountModel::radius(double theta) const { return pivot_radius - axial_offset * std::sin(theta); }
double MountModel::height(double theta) const { return pivot_height - axial_offset * std::cos(theta); }

std::array<CoilPose, 3> coil_poses(double theta, double mount_radius, double mount_height) {
  if (!(theta >= 0.0 && theta < kPi / 2.0))
    throw ContractError("coil_poses: theta must lie in [0, pi/2)");
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  CoilPose p0;
  p0.center = Vec3(mount_radius, 0.0, mount_height);
  p0.axis = Vec3(-st, 0.0, -ct);
  p0.xdir = Vec3(ct, 0.0, -st);
  p0.azimuth_index = 0;
  std::array<CoilPose, 3> out;
  for (int k = 0; k < 3; ++k) {
    const Mat3 R = c3_rotation(k);
    out[k].center = R * p0.center;
    out[k].axis = R * p0.axis;
    out[k].xdir = R * p0.xdir;
    out[k].azimuth_index = k;
  }
  return out;
}

std::array<CoilPose, 3> coil_poses(double theta, const MountModel& m) {
  return coil_poses(theta, m.radius(theta), m.height(theta));
}

double z_limit(double theta, const ClearanceModel& m) {
  return m.z_ref - m.tip_extent * (theta - m.theta_ref);
}

}  // namespace reconfmag

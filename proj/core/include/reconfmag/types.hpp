#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <numbers>

namespace reconfmag {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;  // T*m/A

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Rotation by k*120 degrees about +z. Built from exact constants so that
// repeated application stays consistent to the last bit.
Mat3 c3_rotation(int k);

}  // namespace reconfmag

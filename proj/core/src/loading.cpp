#include "reconfmag/loading.hpp"

#include <cmath>
#include <sstream>

#include "reconfmag/error.hpp"

namespace reconfmag {

Vec3 FieldCommand::direction() const {
  return Vec3(std::cos(epsilon) * std::cos(alpha), std::cos(epsilon) * std::sin(alpha),
              std::sin(epsilon));
}

void RotatingFieldSpec::validate() const {
  if (std::abs(axis.norm() - 1.0) > 1e-9) throw ContractError("rotating field: axis must be unit");
  if (!(B0 > 0.0)) throw ContractError("rotating field: B0 must be positive");
  if (phase_samples < 8) throw ContractError("rotating field: phase_samples must be >= 8");
  if (!(dipole_moment > 0.0)) throw ContractError("rotating field: dipole moment must be positive");
}

std::pair<Vec3, Vec3> rotation_plane_basis(const Vec3& n) {
  Vec3 e1 = Vec3::UnitZ().cross(n);
  if (e1.norm() < 1e-9)
    e1 = Vec3::UnitX();
  else
    e1.normalize();
  return {e1, n.cross(e1)};
}

CurrentVector synthesize_tracking_currents(const FieldSample& s, const FieldCommand& cmd,
                                           double I_max) {
  if (!(cmd.B0 >= 0.0)) throw ContractError("field command: B0 must be non-negative");
  return least_norm_currents(s.A, cmd.B0 * cmd.direction(), I_max);
}

double gradient_disturbance(const FieldSample& s, const FieldCommand& cmd, double I_max) {
  const CurrentVector c = synthesize_tracking_currents(s, cmd, I_max);
  return field_gradient(s.grad, c.i).norm();
}

double azimuth_average(const FieldSample& s, double epsilon, double B0, double I_max,
                       int n_alpha) {
  if (n_alpha < 12) throw ContractError("azimuth_average: n_alpha must be >= 12");
  double sum = 0.0;
  std::ostringstream failed;
  bool any_failed = false;
  for (int j = 0; j < n_alpha; ++j) {
    const double alpha = 2.0 * kPi * j / n_alpha;
    try {
      sum += gradient_disturbance(s, FieldCommand{B0, alpha, epsilon}, I_max);
    } catch (const SynthesisError&) {
      failed << (any_failed ? ", " : "") << rad2deg(alpha);
      any_failed = true;
    }
  }
  if (any_failed)
    throw SynthesisError("azimuth_average: synthesis failed at alpha = {" + failed.str() + "} deg");
  return sum / n_alpha;
}

CycleForce cycle_average_force(const FieldSample& s, const RotatingFieldSpec& spec,
                               double I_max) {
  spec.validate();
  const auto [e1, e2] = rotation_plane_basis(spec.axis);
  Vec3 acc = Vec3::Zero();
  const int n = spec.phase_samples;
  for (int j = 0; j < n; ++j) {
    const double ph = spec.phase_offset + 2.0 * kPi * (j + 0.5) / n;
    const Vec3 b = std::cos(ph) * e1 + std::sin(ph) * e2;
    CurrentVector c;
    try {
      c = least_norm_currents(s.A, spec.B0 * b, I_max);
    } catch (const SynthesisError& e) {
      std::ostringstream os;
      os << "cycle_average_force: phase " << rad2deg(ph) << " deg: " << e.what();
      throw SynthesisError(os.str());
    }
    const Mat3 grad = field_gradient(s.grad, c.i);
    acc += grad.transpose() * (spec.dipole_moment * b);
  }
  CycleForce out;
  out.F_bar = acc / n;
  out.F_z = out.F_bar.z();
  return out;
}

double gradient_disturbance(const FieldModel& model, const Vec3& p, double theta,
                            const FieldCommand& cmd, double I_max) {
  return gradient_disturbance(model.evaluate(p, theta), cmd, I_max);
}

double azimuth_average(const FieldModel& model, const Vec3& p, double theta, double epsilon,
                       double B0, double I_max, int n_alpha) {
  return azimuth_average(model.evaluate(p, theta), epsilon, B0, I_max, n_alpha);
}

CycleForce cycle_average_force(const FieldModel& model, const Vec3& p, double theta,
                               const RotatingFieldSpec& spec, double I_max) {
  return cycle_average_force(model.evaluate(p, theta), spec, I_max);
}

std::vector<std::pair<double, double>> lift_depth_profile(const FieldModel& model, double theta,
                                                          const RotatingFieldSpec& spec,
                                                          const std::vector<double>& zs,
                                                          double I_max) {
  std::vector<std::pair<double, double>> out;
  out.reserve(zs.size());
  for (double z : zs)
    out.emplace_back(z, cycle_average_force(model, Vec3(0.0, 0.0, z), theta, spec, I_max).F_z);
  return out;
}

}  // namespace reconfmag

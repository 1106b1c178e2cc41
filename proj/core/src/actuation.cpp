#include "reconfmag/actuation.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "reconfmag/error.hpp"

namespace reconfmag {

LocalCoords local_coords(const Vec3& p, const CoilPose& pose) {
  const Vec3 d = p - pose.center;
  LocalCoords lc;
  lc.z = d.dot(pose.axis);
  const Vec3 radial = d - lc.z * pose.axis;
  lc.r = radial.norm();
  lc.e_r = lc.r > 0.0 ? Vec3(radial / lc.r) : pose.xdir;
  return lc;
}

Vec3 coil_column(const Vec3& p, const CoilArray& coils, int k) {
  const CoilPose& pose = coils.poses[static_cast<std::size_t>(k)];
  const LocalCoords lc = local_coords(p, pose);
  FieldRZ f;
  try {
    f = coils.sources[static_cast<std::size_t>(k)]->unit_field(lc.r, lc.z);
  } catch (const DomainError& e) {
    std::ostringstream os;
    os << "coil " << k << ": " << e.what();
    throw DomainError(os.str());
  }
  return f.br * lc.e_r + f.bz * pose.axis;
}

Mat3 actuation_matrix(const Vec3& p, const CoilArray& coils) {
  Mat3 A;
  for (int k = 0; k < 3; ++k) A.col(k) = coil_column(p, coils, k);
  return A;
}

Mat3 coil_jacobian(const Vec3& p, const CoilArray& coils, int k, double delta, const Mat3& frame) {
  if (!(delta > 0.0)) throw ContractError("gradient: delta must be positive");
  Mat3 D;
  for (int n = 0; n < 3; ++n) {
    const Vec3 step = delta * frame.col(n);
    D.col(n) = (coil_column(p + step, coils, k) - coil_column(p - step, coils, k)) / (2.0 * delta);
  }
  // D = J * frame  =>  J = D * frame^T for orthonormal frames.
  return D * frame.transpose();
}

GradientBasis gradient_basis(const Vec3& p, const CoilArray& coils, double delta) {
  GradientBasis g;
  g.delta = delta;
  for (int k = 0; k < 3; ++k) {
    const Mat3 frame = c3_rotation(coils.poses[static_cast<std::size_t>(k)].azimuth_index);
    g.G[static_cast<std::size_t>(k)] = coil_jacobian(p, coils, k, delta, frame);
  }
  return g;
}

CurrentVector pseudo_inverse_currents(const Mat3& A, const Vec3& B, double I_max) {
  if (!B.allFinite()) throw ContractError("least_norm_currents: target field is not finite");
  if (!A.allFinite()) throw ContractError("least_norm_currents: actuation matrix is not finite");
  CurrentVector out;
  if (B.isZero(0.0)) return out;
  Eigen::JacobiSVD<Mat3> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  const double cutoff = 1e-8 * sv[0];
  Vec3 coeff = svd.matrixU().transpose() * B;
  for (int j = 0; j < 3; ++j) coeff[j] = (sv[j] > cutoff && sv[j] > 0.0) ? coeff[j] / sv[j] : 0.0;
  out.i = svd.matrixV() * coeff;
  out.residual = (A * out.i - B).norm();
  out.feasible = out.i.cwiseAbs().maxCoeff() <= I_max;
  return out;
}

CurrentVector least_norm_currents(const Mat3& A, const Vec3& B, double I_max) {
  CurrentVector out = pseudo_inverse_currents(A, B, I_max);
  const double bn = B.norm();
  if (out.residual > 1e-9 * bn) {
    std::ostringstream os;
    os << "unreachable field direction (residual " << out.residual << " T for |B|=" << bn << " T)";
    throw SynthesisError(os.str());
  }
  return out;
}

DirectFieldModel::DirectFieldModel(std::shared_ptr<const CoilFieldSource> source, MountModel mount,
                                   double delta)
    : source_(std::move(source)), mount_(mount), delta_(delta) {
  if (!source_) throw ContractError("DirectFieldModel: null field source");
  if (!(delta_ > 0.0)) throw ContractError("DirectFieldModel: delta must be positive");
}

CoilArray DirectFieldModel::coils(double theta) const {
  CoilArray c;
  c.poses = coil_poses(theta, mount_);
  c.sources = {source_, source_, source_};
  return c;
}

FieldSample DirectFieldModel::evaluate(const Vec3& p, double theta) const {
  const CoilArray c = coils(theta);
  FieldSample s;
  s.A = actuation_matrix(p, c);
  s.grad = gradient_basis(p, c, delta_);
  return s;
}

}  // namespace reconfmag

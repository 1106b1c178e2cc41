#pragma once

#include <array>
#include <memory>

#include "reconfmag/coil_field.hpp"
#include "reconfmag/mechanism.hpp"
#include "reconfmag/types.hpp"

namespace reconfmag {

// Unit-current field of one coil in its own cylindrical frame.
class CoilFieldSource {
 public:
  virtual ~CoilFieldSource() = default;
  virtual FieldRZ unit_field(double r, double z) const = 0;
};

// Interpolated lookup in a precomputed map.
class MapFieldSource final : public CoilFieldSource {
 public:
  explicit MapFieldSource(std::shared_ptr<const AxisymmetricFieldMap> map) : map_(std::move(map)) {}
  FieldRZ unit_field(double r, double z) const override { return map_->sample(r, z); }
  const AxisymmetricFieldMap& map() const { return *map_; }

 private:
  std::shared_ptr<const AxisymmetricFieldMap> map_;
};

// Direct loop summation; slow but free of interpolation error.
class DirectFieldSource final : public CoilFieldSource {
 public:
  explicit DirectFieldSource(CoilSpec spec) : spec_(spec) {}
  FieldRZ unit_field(double r, double z) const override { return coil_unit_field(spec_, r, z); }

 private:
  CoilSpec spec_;
};

struct CoilArray {
  std::array<CoilPose, 3> poses;
  std::array<std::shared_ptr<const CoilFieldSource>, 3> sources;
};

struct LocalCoords {
  double r = 0.0;
  double z = 0.0;
  Vec3 e_r = Vec3::UnitX();
};

LocalCoords local_coords(const Vec3& p, const CoilPose& pose);

// Field of coil k at 1 A, expressed in the mechanism frame.
Vec3 coil_column(const Vec3& p, const CoilArray& coils, int k);

// Columns are the unit-current fields of the three coils (T/A).
Mat3 actuation_matrix(const Vec3& p, const CoilArray& coils);

struct GradientBasis {
  // G[k](m, n) = d(a_k)_m / dx_n  in T/(A m)
  std::array<Mat3, 3> G{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  double delta = 0.0;
};

// Second-order central differences with step delta. For coil k the three
// stencil directions are the mechanism axes rotated by the coil's azimuth
// (k * 120 deg about z); the difference quotients are then rotated back.
// Coils related by the threefold symmetry therefore see congruent stencils.
GradientBasis gradient_basis(const Vec3& p, const CoilArray& coils, double delta);

// Finite-difference Jacobian of coil k's field along arbitrary orthonormal
// stencil axes (columns of `frame`), returned in mechanism coordinates.
Mat3 coil_jacobian(const Vec3& p, const CoilArray& coils, int k, double delta, const Mat3& frame);

inline Vec3 field(const Mat3& A, const Vec3& i) { return A * i; }

inline Mat3 field_gradient(const GradientBasis& g, const Vec3& i) {
  return i[0] * g.G[0] + i[1] * g.G[1] + i[2] * g.G[2];
}

struct CurrentVector {
  Vec3 i = Vec3::Zero();
  bool feasible = true;
  double residual = 0.0;  // ||A i - B_target|| in T
};

// Minimum 2-norm solution of A i = B via SVD pseudoinverse (singular values
// below 1e-8 sigma_max are dropped). Throws SynthesisError when B is not in
// the range of A. The result is returned even if it violates I_max.
CurrentVector least_norm_currents(const Mat3& A, const Vec3& B_target, double I_max);

// The same pseudoinverse solve without the range check; `residual` reports
// how far A i is from the target.
CurrentVector pseudo_inverse_currents(const Mat3& A, const Vec3& B_target, double I_max);

// Everything a consumer needs at one point for one tilt.
struct FieldSample {
  Mat3 A = Mat3::Zero();
  GradientBasis grad;
};

// Common interface of the direct (map based) model and the stored library.
class FieldModel {
 public:
  virtual ~FieldModel() = default;
  virtual FieldSample evaluate(const Vec3& p, double theta) const = 0;
};

// Evaluates A and G on demand from per-coil sources and the mount model.
class DirectFieldModel final : public FieldModel {
 public:
  DirectFieldModel(std::shared_ptr<const CoilFieldSource> source, MountModel mount, double delta);
  FieldSample evaluate(const Vec3& p, double theta) const override;
  CoilArray coils(double theta) const;
  double delta() const { return delta_; }

 private:
  std::shared_ptr<const CoilFieldSource> source_;
  MountModel mount_;
  double delta_;
};

}  // namespace reconfmag

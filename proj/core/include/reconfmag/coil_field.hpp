#pragma once

#include <cstddef>
#include <vector>

namespace reconfmag {

struct CoilSpec {
  double inner_radius = 0.015;  // m
  double outer_radius = 0.030;  // m
  double axial_length = 0.050;  // m
  double turns = 2000.0;
  double max_current = 5.0;  // A
  // Midpoint quadrature of the winding cross-section (loops per direction).
  int radial_samples = 8;
  int axial_samples = 16;

  void validate() const;
};

struct FieldRZ {
  double br = 0.0;
  double bz = 0.0;
};

// Exact field of a thin circular loop of radius `loop_radius` in the plane
// z = 0, carrying `current`, at cylindrical point (r, z). Throws DomainError
// on the conductor itself.
FieldRZ loop_field(double loop_radius, double current, double r, double z);

bool inside_winding(const CoilSpec& spec, double r, double z);

// Field per ampere of coil current, obtained by summing loop fields over the
// winding quadrature. Throws DomainError inside the winding volume.
FieldRZ coil_unit_field(const CoilSpec& spec, double r, double z);

// Same sum with an explicit quadrature (used for convergence studies).
FieldRZ coil_unit_field(const CoilSpec& spec, double r, double z, int radial_samples,
                        int axial_samples);

std::vector<double> uniform_grid(double lo, double hi, double step);

enum class WindingPolicy { Mask, Reject };

// Tabulated unit-current field on a tensor (r, z) grid. Values are stored
// row-major with z fastest. Nodes inside the winding hold NaN.
class AxisymmetricFieldMap {
 public:
  AxisymmetricFieldMap(std::vector<double> r_grid, std::vector<double> z_grid,
                       std::vector<double> br, std::vector<double> bz);

  const std::vector<double>& r_grid() const { return r_; }
  const std::vector<double>& z_grid() const { return z_; }
  std::size_t nr() const { return r_.size(); }
  std::size_t nz() const { return z_.size(); }
  double br_at(std::size_t ir, std::size_t iz) const { return br_[ir * z_.size() + iz]; }
  double bz_at(std::size_t ir, std::size_t iz) const { return bz_[ir * z_.size() + iz]; }
  bool masked(std::size_t ir, std::size_t iz) const;
  bool contains(double r, double z) const;

  // Bilinear interpolation. Throws DomainError outside the grid or when a
  // corner with nonzero weight is masked.
  FieldRZ sample(double r, double z) const;

  const std::vector<double>& br_values() const { return br_; }
  const std::vector<double>& bz_values() const { return bz_; }

 private:
  std::vector<double> r_, z_, br_, bz_;
};

AxisymmetricFieldMap build_field_map(const CoilSpec& spec, const std::vector<double>& r_grid,
                                     const std::vector<double>& z_grid,
                                     WindingPolicy policy = WindingPolicy::Mask);

inline FieldRZ sample_field_map(const AxisymmetricFieldMap& map, double r, double z) {
  return map.sample(r, z);
}

}  // namespace reconfmag

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "reconfmag/actuation.hpp"
#include "reconfmag/coil_field.hpp"
#include "reconfmag/mechanism.hpp"

namespace reconfmag {

// Spatial sampling of the workspace box for every tilt. The upper z bound
// comes from the clearance model, so the number of z layers depends on theta.
struct LibraryGrid {
  double xy_half = 0.05;
  double z_min = -0.30;
  double spacing = 0.0025;
};

// Sampling of each coil's (r, z) field map.
struct MapGridSpec {
  double r_max = 0.30;
  double z_half = 0.35;
  double spacing = 0.0015;
};

struct ThetaGrid {
  double theta = 0.0;
  Vec3 origin = Vec3::Zero();
  double spacing = 0.0;
  std::size_t nx = 0, ny = 0, nz = 0;

  std::size_t node_count() const { return nx * ny * nz; }
  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return ix + nx * (iy + ny * iz);
  }
  Vec3 node(std::size_t ix, std::size_t iy, std::size_t iz) const;
  Vec3 upper() const;
};

ThetaGrid make_theta_grid(double theta, const LibraryGrid& grid, const ClearanceModel& clearance);

// Per-node record: x, y, z, the 9 entries of A (column-major, column k is
// coil k), then 27 gradient entries ordered coil, row m, column n.
inline constexpr std::size_t kNodeDoubles = 39;

class FieldLibrary final : public FieldModel {
 public:
  FieldLibrary(std::string metadata_json, double fd_step, std::vector<ThetaGrid> grids,
               std::vector<double> payload);

  const std::string& metadata() const { return metadata_; }
  double fd_step() const { return fd_step_; }
  const std::vector<ThetaGrid>& grids() const { return grids_; }
  const std::vector<double>& payload() const { return payload_; }
  std::vector<double> thetas() const;

  // Index of the block whose theta matches to 1e-9 rad; throws otherwise.
  std::size_t theta_index(double theta) const;

  const double* record(std::size_t t, std::size_t node) const;
  bool valid(std::size_t t, std::size_t node) const;
  FieldSample node_sample(std::size_t t, std::size_t node) const;

  // Trilinear interpolation of A and the gradient basis.
  FieldSample query(const Vec3& p, double theta) const;
  FieldSample evaluate(const Vec3& p, double theta) const override { return query(p, theta); }

 private:
  std::string metadata_;
  double fd_step_;
  std::vector<ThetaGrid> grids_;
  std::vector<std::size_t> offsets_;
  std::vector<double> payload_;
};

struct LibraryBuildSpec {
  CoilSpec coil;
  MountModel mount;
  ClearanceModel clearance;
  std::vector<double> thetas;  // rad
  LibraryGrid grid;
  MapGridSpec map;
  double fd_step = 0.0025;
  std::string metadata_json = "{}";
};

std::shared_ptr<const AxisymmetricFieldMap> build_coil_map(const CoilSpec& coil,
                                                           const MapGridSpec& map);

FieldLibrary build_library(const LibraryBuildSpec& spec);
FieldLibrary build_library(const LibraryBuildSpec& spec,
                           std::shared_ptr<const AxisymmetricFieldMap> map);

inline FieldSample query_library(const FieldLibrary& lib, const Vec3& p, double theta) {
  return lib.query(p, theta);
}

}  // namespace reconfmag

#include "reconfmag/library.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "reconfmag/error.hpp"

namespace reconfmag {

Vec3 ThetaGrid::node(std::size_t ix, std::size_t iy, std::size_t iz) const {
  return origin + spacing * Vec3(static_cast<double>(ix), static_cast<double>(iy),
                                 static_cast<double>(iz));
}

Vec3 ThetaGrid::upper() const { return node(nx - 1, ny - 1, nz - 1); }

ThetaGrid make_theta_grid(double theta, const LibraryGrid& g, const ClearanceModel& clearance) {
  if (!(g.spacing > 0.0) || !(g.xy_half > 0.0)) throw ContractError("library grid: bad spacing");
  const double ztop = z_limit(theta, clearance);
  if (!(ztop > g.z_min)) {
    std::ostringstream os;
    os << "library grid: z_limit " << ztop << " is below z_min " << g.z_min;
    throw ConfigError(os.str());
  }
  ThetaGrid t;
  t.theta = theta;
  t.spacing = g.spacing;
  t.origin = Vec3(-g.xy_half, -g.xy_half, g.z_min);
  const auto count = [&](double span) {
    return static_cast<std::size_t>(std::floor(span / g.spacing + 1e-9)) + 1;
  };
  t.nx = t.ny = count(2.0 * g.xy_half);
  t.nz = count(ztop - g.z_min);
  return t;
}

FieldLibrary::FieldLibrary(std::string metadata_json, double fd_step, std::vector<ThetaGrid> grids,
                           std::vector<double> payload)
    : metadata_(std::move(metadata_json)),
      fd_step_(fd_step),
      grids_(std::move(grids)),
      payload_(std::move(payload)) {
  std::size_t off = 0;
  for (const auto& g : grids_) {
    offsets_.push_back(off);
    off += g.node_count() * kNodeDoubles;
  }
  if (off != payload_.size()) throw ContractError("FieldLibrary: payload size does not match grids");
  for (std::size_t i = 1; i < grids_.size(); ++i)
    if (!(grids_[i].theta > grids_[i - 1].theta))
      throw ContractError("FieldLibrary: theta values must be strictly increasing");
}

std::vector<double> FieldLibrary::thetas() const {
  std::vector<double> t;
  for (const auto& g : grids_) t.push_back(g.theta);
  return t;
}

std::size_t FieldLibrary::theta_index(double theta) const {
  for (std::size_t i = 0; i < grids_.size(); ++i)
    if (std::abs(grids_[i].theta - theta) <= 1e-9) return i;
  std::ostringstream os;
  os << "theta=" << rad2deg(theta) << " deg not in library; available {";
  for (std::size_t i = 0; i < grids_.size(); ++i)
    os << (i ? ", " : "") << rad2deg(grids_[i].theta);
  os << "} deg";
  throw DomainError(os.str());
}

const double* FieldLibrary::record(std::size_t t, std::size_t node) const {
  return payload_.data() + offsets_[t] + node * kNodeDoubles;
}

bool FieldLibrary::valid(std::size_t t, std::size_t node) const {
  return std::isfinite(record(t, node)[3]);
}

namespace {

void unpack(const double* rec, FieldSample& s, double w) {
  for (int k = 0; k < 3; ++k)
    for (int m = 0; m < 3; ++m) s.A(m, k) += w * rec[3 + 3 * k + m];
  for (int k = 0; k < 3; ++k)
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n)
        s.grad.G[static_cast<std::size_t>(k)](m, n) += w * rec[12 + 9 * k + 3 * m + n];
}

void pack(double* rec, const Vec3& p, const FieldSample& s) {
  rec[0] = p.x();
  rec[1] = p.y();
  rec[2] = p.z();
  for (int k = 0; k < 3; ++k)
    for (int m = 0; m < 3; ++m) rec[3 + 3 * k + m] = s.A(m, k);
  for (int k = 0; k < 3; ++k)
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n)
        rec[12 + 9 * k + 3 * m + n] = s.grad.G[static_cast<std::size_t>(k)](m, n);
}

}  // namespace

FieldSample FieldLibrary::node_sample(std::size_t t, std::size_t node) const {
  FieldSample s;
  s.grad.delta = fd_step_;
  unpack(record(t, node), s, 1.0);
  return s;
}

FieldSample FieldLibrary::query(const Vec3& p, double theta) const {
  const std::size_t t = theta_index(theta);
  const ThetaGrid& g = grids_[t];
  const Vec3 rel = (p - g.origin) / g.spacing;
  const std::size_t n[3] = {g.nx, g.ny, g.nz};
  std::size_t i0[3];
  double f[3];
  for (int a = 0; a < 3; ++a) {
    const double x = rel[a];
    const double top = static_cast<double>(n[a] - 1);
    // Tolerate round-off at the faces of the box.
    if (!(x >= -1e-9 && x <= top + 1e-9)) {
      std::ostringstream os;
      os << "point (" << p.x() << ", " << p.y() << ", " << p.z() << ") outside library grid for theta="
         << rad2deg(theta) << " deg";
      throw DomainError(os.str());
    }
    double xc = std::clamp(x, 0.0, top);
    // Snap to the node so that queries at grid points return stored values.
    if (std::abs(xc - std::round(xc)) < 1e-9) xc = std::round(xc);
    std::size_t i = static_cast<std::size_t>(std::floor(xc));
    if (n[a] == 1) {
      i0[a] = 0;
      f[a] = 0.0;
      continue;
    }
    if (i >= n[a] - 1) i = n[a] - 2;
    i0[a] = i;
    f[a] = xc - static_cast<double>(i);
  }
  FieldSample s;
  s.grad.delta = fd_step_;
  for (int c = 0; c < 8; ++c) {
    const int bx = c & 1, by = (c >> 1) & 1, bz = (c >> 2) & 1;
    const double w = (bx ? f[0] : 1.0 - f[0]) * (by ? f[1] : 1.0 - f[1]) * (bz ? f[2] : 1.0 - f[2]);
    if (w == 0.0) continue;
    const std::size_t node = g.index(i0[0] + bx, i0[1] + by, i0[2] + bz);
    if (!valid(t, node)) throw DomainError("library query touches an invalid node");
    unpack(record(t, node), s, w);
  }
  return s;
}

std::shared_ptr<const AxisymmetricFieldMap> build_coil_map(const CoilSpec& coil,
                                                           const MapGridSpec& m) {
  return std::make_shared<const AxisymmetricFieldMap>(
      build_field_map(coil, uniform_grid(0.0, m.r_max, m.spacing),
                      uniform_grid(-m.z_half, m.z_half, m.spacing)));
}

FieldLibrary build_library(const LibraryBuildSpec& spec) {
  return build_library(spec, build_coil_map(spec.coil, spec.map));
}

FieldLibrary build_library(const LibraryBuildSpec& spec,
                           std::shared_ptr<const AxisymmetricFieldMap> map) {
  if (spec.thetas.empty()) throw ConfigError("library: theta list is empty");
  std::vector<double> thetas = spec.thetas;
  std::sort(thetas.begin(), thetas.end());
  DirectFieldModel model(std::make_shared<MapFieldSource>(std::move(map)), spec.mount, spec.fd_step);

  std::vector<ThetaGrid> grids;
  std::size_t total = 0;
  for (double th : thetas) {
    grids.push_back(make_theta_grid(th, spec.grid, spec.clearance));
    total += grids.back().node_count();
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> payload(total * kNodeDoubles, nan);
  std::size_t base = 0;
  for (const ThetaGrid& g : grids) {
    const CoilArray coils = model.coils(g.theta);
    for (std::size_t iz = 0; iz < g.nz; ++iz)
      for (std::size_t iy = 0; iy < g.ny; ++iy)
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
          const Vec3 p = g.node(ix, iy, iz);
          double* rec = payload.data() + (base + g.index(ix, iy, iz)) * kNodeDoubles;
          rec[0] = p.x();
          rec[1] = p.y();
          rec[2] = p.z();
          try {
            FieldSample s;
            s.A = actuation_matrix(p, coils);
            s.grad = gradient_basis(p, coils, spec.fd_step);
            pack(rec, p, s);
          } catch (const DomainError&) {
            // Node stays NaN-flagged.
          }
        }
    base += g.node_count();
  }
  return FieldLibrary(spec.metadata_json, spec.fd_step, std::move(grids), std::move(payload));
}

}  // namespace reconfmag

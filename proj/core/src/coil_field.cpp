#include "reconfmag/coil_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "reconfmag/error.hpp"
#include "reconfmag/types.hpp"

namespace reconfmag {

void CoilSpec::validate() const {
  if (!(inner_radius > 0.0) || !(outer_radius >= inner_radius))
    throw ConfigError("coil: require 0 < inner_radius <= outer_radius");
  if (!(axial_length > 0.0)) throw ConfigError("coil: axial_length must be positive");
  if (!(turns >= 1.0)) throw ConfigError("coil: turns must be >= 1");
  if (!(max_current > 0.0)) throw ConfigError("coil: max_current must be positive");
  if (radial_samples < 1 || axial_samples < 1)
    throw ConfigError("coil: quadrature sample counts must be >= 1");
}

namespace {

struct Elliptic {
  double K;         // first kind
  double K_minus_E; // K - E, formed without cancellation
};

// Arithmetic-geometric mean evaluation of the complete elliptic integrals for
// parameter m = k^2 < 1. K - E is accumulated from the c_n terms directly.
Elliptic complete_elliptic(double m) {
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  double c2 = m;  // c_0^2
  double weight = 0.5;
  double sum = weight * c2;
  for (int n = 0; n < 40; ++n) {
    const double an = 0.5 * (a + b);
    const double cn = 0.5 * (a - b);
    b = std::sqrt(a * b);
    a = an;
    weight *= 2.0;
    c2 = cn * cn;
    sum += weight * c2;
    if (c2 <= 1e-34 * a * a) break;
  }
  const double K = kPi / (2.0 * a);
  return {K, K * sum};
}

}  // namespace

FieldRZ loop_field(double a, double current, double r, double z) {
  if (!(a > 0.0)) throw ContractError("loop_field: loop radius must be positive");
  if (r < 0.0) throw ContractError("loop_field: r must be non-negative");
  if (current == 0.0) return {};

  const double rr = a * a + r * r + z * z;
  const double alpha2 = rr - 2.0 * a * r;
  const double beta2 = rr + 2.0 * a * r;
  if (alpha2 <= 1e-24 * a * a) throw DomainError("loop_field: on-conductor evaluation");

  const double beta = std::sqrt(beta2);
  const double k2 = 4.0 * a * r / beta2;
  const Elliptic el = complete_elliptic(k2);
  const double K = el.K;
  const double E = el.K - el.K_minus_E;
  const double c = kMu0 * current / kPi;

  FieldRZ out;
  out.bz = c / (2.0 * alpha2 * beta) * ((a * a - r * r - z * z) * E + alpha2 * K);
  if (r == 0.0) {
    out.br = 0.0;
  } else if (k2 < 1e-5) {
    // Near the axis the closed form loses digits. Use the off-axis expansion
    // B_r = -(r/2) dB0/dz + (r^3/16) d3B0/dz3 of the on-axis field B0.
    const double s = a * a + z * z;
    const double lead = 3.0 * kMu0 * current * a * a * z * r / (4.0 * s * s * std::sqrt(s));
    out.br = lead * (1.0 + r * r / (8.0 * s) * (15.0 - 35.0 * z * z / s));
  } else {
    // rr*E - alpha2*K rewritten as 2arK - rr(K - E).
    out.br = c * z / (2.0 * alpha2 * beta * r) * (2.0 * a * r * K - rr * el.K_minus_E);
  }
  return out;
}

bool inside_winding(const CoilSpec& spec, double r, double z) {
  return r >= spec.inner_radius && r <= spec.outer_radius &&
         std::abs(z) <= 0.5 * spec.axial_length;
}

FieldRZ coil_unit_field(const CoilSpec& spec, double r, double z, int nr, int nz) {
  if (nr < 1 || nz < 1) throw ContractError("coil_unit_field: quadrature counts must be >= 1");
  if (inside_winding(spec, r, z)) throw DomainError("coil_unit_field: inside winding volume");
  const double w = spec.turns / (static_cast<double>(nr) * nz);
  const double dr = (spec.outer_radius - spec.inner_radius) / nr;
  const double dz = spec.axial_length / nz;
  FieldRZ sum;
  for (int i = 0; i < nr; ++i) {
    const double a = spec.inner_radius + (i + 0.5) * dr;
    for (int j = 0; j < nz; ++j) {
      const double zl = -0.5 * spec.axial_length + (j + 0.5) * dz;
      const FieldRZ f = loop_field(a, w, r, z - zl);
      sum.br += f.br;
      sum.bz += f.bz;
    }
  }
  return sum;
}

FieldRZ coil_unit_field(const CoilSpec& spec, double r, double z) {
  return coil_unit_field(spec, r, z, spec.radial_samples, spec.axial_samples);
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo)) throw ContractError("uniform_grid: need lo < hi and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + static_cast<double>(i) * step;
  return g;
}

namespace {

void check_grid(const std::vector<double>& g, const char* name) {
  if (g.size() < 2) throw ContractError(std::string("field map: ") + name + " needs >= 2 nodes");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1]))
      throw ContractError(std::string("field map: ") + name + " must be strictly increasing");
}

// Index of the cell [g[i], g[i+1]] containing x, clamping the upper edge into
// the last cell.
std::size_t locate(const std::vector<double>& g, double x) {
  auto it = std::upper_bound(g.begin(), g.end(), x);
  std::size_t i = static_cast<std::size_t>(it - g.begin());
  if (i == 0) return 0;
  return std::min(i - 1, g.size() - 2);
}

}  // namespace

AxisymmetricFieldMap::AxisymmetricFieldMap(std::vector<double> r_grid, std::vector<double> z_grid,
                                           std::vector<double> br, std::vector<double> bz)
    : r_(std::move(r_grid)), z_(std::move(z_grid)), br_(std::move(br)), bz_(std::move(bz)) {
  check_grid(r_, "r_grid");
  check_grid(z_, "z_grid");
  if (r_.front() < 0.0) throw ContractError("field map: r_grid must be non-negative");
  if (br_.size() != r_.size() * z_.size() || bz_.size() != br_.size())
    throw ContractError("field map: value array shape does not match grids");
}

bool AxisymmetricFieldMap::masked(std::size_t ir, std::size_t iz) const {
  const std::size_t k = ir * z_.size() + iz;
  return !std::isfinite(br_[k]) || !std::isfinite(bz_[k]);
}

bool AxisymmetricFieldMap::contains(double r, double z) const {
  return r >= r_.front() && r <= r_.back() && z >= z_.front() && z <= z_.back();
}

FieldRZ AxisymmetricFieldMap::sample(double r, double z) const {
  if (!contains(r, z)) {
    std::ostringstream os;
    os << "outside field map domain (r=" << r << ", z=" << z << ")";
    throw DomainError(os.str());
  }
  const std::size_t i = locate(r_, r);
  const std::size_t j = locate(z_, z);
  const double t = (r - r_[i]) / (r_[i + 1] - r_[i]);
  const double u = (z - z_[j]) / (z_[j + 1] - z_[j]);
  const double w[4] = {(1.0 - t) * (1.0 - u), (1.0 - t) * u, t * (1.0 - u), t * u};
  const std::size_t idx[4] = {i * z_.size() + j, i * z_.size() + j + 1, (i + 1) * z_.size() + j,
                              (i + 1) * z_.size() + j + 1};
  FieldRZ out;
  for (int c = 0; c < 4; ++c) {
    if (w[c] == 0.0) continue;
    const double br = br_[idx[c]];
    const double bz = bz_[idx[c]];
    if (!std::isfinite(br) || !std::isfinite(bz))
      throw DomainError("field map: query touches a masked (winding) cell");
    out.br += w[c] * br;
    out.bz += w[c] * bz;
  }
  return out;
}

AxisymmetricFieldMap build_field_map(const CoilSpec& spec, const std::vector<double>& r_grid,
                                     const std::vector<double>& z_grid, WindingPolicy policy) {
  spec.validate();
  check_grid(r_grid, "r_grid");
  check_grid(z_grid, "z_grid");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> br(r_grid.size() * z_grid.size());
  std::vector<double> bz(br.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    for (std::size_t j = 0; j < z_grid.size(); ++j) {
      const std::size_t k = i * z_grid.size() + j;
      if (inside_winding(spec, r_grid[i], z_grid[j])) {
        if (policy == WindingPolicy::Reject)
          throw ContractError("build_field_map: grid overlaps the winding and masking is disabled");
        br[k] = bz[k] = nan;
        continue;
      }
      const FieldRZ f = coil_unit_field(spec, r_grid[i], z_grid[j]);
      br[k] = f.br;
      bz[k] = f.bz;
    }
  }
  return AxisymmetricFieldMap(r_grid, z_grid, std::move(br), std::move(bz));
}

}  // namespace reconfmag

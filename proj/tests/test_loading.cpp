#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "reconfmag/error.hpp"
#include "reconfmag/library.hpp"
#include "reconfmag/loading.hpp"
#include "test_support.hpp"

using namespace reconfmag;

namespace {

const double kTh = deg2rad(45.0);

const DirectFieldModel& model() {
  static const DirectFieldModel m(testsupport::map_source(), MountModel{}, 0.0025);
  return m;
}

}  // namespace

TEST_CASE("field command direction") {
  const FieldCommand c{1e-3, 0.3, -0.4};
  CHECK(std::abs(c.direction().norm() - 1.0) < 1e-15);
  CHECK(FieldCommand{1e-3, 1.0, kPi / 2}.direction().z() == doctest::Approx(1.0));
}

TEST_CASE("rotation plane basis") {
  auto [a, b] = rotation_plane_basis(Vec3::UnitZ());
  CHECK(a == Vec3::UnitX());
  CHECK((b - Vec3::UnitY()).norm() < 1e-15);
  const Vec3 n = Vec3(0.3, -0.5, 0.8).normalized();
  std::tie(a, b) = rotation_plane_basis(n);
  CHECK(std::abs(a.dot(n)) < 1e-15);
  CHECK(std::abs(b.dot(n)) < 1e-15);
  CHECK(std::abs(a.dot(b)) < 1e-15);
  CHECK(std::abs(b.norm() - 1.0) < 1e-15);
}

TEST_CASE("tracking currents") {
  const FieldSample s = model().evaluate(Vec3(0, 0, -0.22), kTh);
  const CurrentVector up = synthesize_tracking_currents(s, FieldCommand{1e-3, 0.0, kPi / 2}, 5.0);
  CHECK(up.i[1] == doctest::Approx(up.i[0]).epsilon(1e-9));
  CHECK(up.i[2] == doctest::Approx(up.i[0]).epsilon(1e-9));
  const FieldCommand c{1e-3, 0.7, 0.2};
  const CurrentVector one = synthesize_tracking_currents(s, c, 5.0);
  const CurrentVector two = synthesize_tracking_currents(s, FieldCommand{2e-3, 0.7, 0.2}, 5.0);
  CHECK((two.i - 2 * one.i).norm() < 1e-12 * one.i.norm());
  CHECK((s.A * one.i - c.B0 * c.direction()).norm() < 1e-9 * c.B0);
  CHECK(gradient_disturbance(s, FieldCommand{0.0, 0.7, 0.2}, 5.0) == 0.0);
}

TEST_CASE("gradient disturbance is invariant under a 120 degree azimuth shift on the axis") {
  const FieldSample s = model().evaluate(Vec3(0, 0, -0.24), kTh);
  for (double eps : {0.0, 0.3, 1.0}) {
    for (double a : {0.0, 0.4, 1.3}) {
      const double g0 = gradient_disturbance(s, FieldCommand{1e-3, a, eps}, 5.0);
      const double g1 = gradient_disturbance(s, FieldCommand{1e-3, a + 2 * kPi / 3, eps}, 5.0);
      const double g2 = gradient_disturbance(s, FieldCommand{1e-3, a + 4 * kPi / 3, eps}, 5.0);
      CHECK(std::abs(g1 - g0) <= 1e-9 * g0);
      CHECK(std::abs(g2 - g0) <= 1e-9 * g0);
    }
  }
}

TEST_CASE("azimuth average") {
  const FieldSample s = model().evaluate(Vec3(0, 0, -0.24), kTh);
  const double pole = gradient_disturbance(s, FieldCommand{1e-3, 0.0, kPi / 2}, 5.0);
  CHECK(azimuth_average(s, kPi / 2, 1e-3, 5.0, 12) == doctest::Approx(pole).epsilon(1e-12));
  const FieldSample off = model().evaluate(Vec3(0.01, -0.02, -0.25), kTh);
  const double m36 = azimuth_average(off, 0.3, 1e-3, 5.0, 36);
  const double m144 = azimuth_average(off, 0.3, 1e-3, 5.0, 144);
  CHECK(std::abs(m36 - m144) < 5e-3 * m144);
  CHECK_THROWS_AS(azimuth_average(s, 0.0, 1e-3, 5.0, 6), ContractError);
  FieldSample flat = s;
  flat.A.row(2).setZero();
  CHECK_THROWS_WITH_AS(azimuth_average(flat, 0.5, 1e-3, 5.0, 12), doctest::Contains("alpha"),
                       SynthesisError);
}

TEST_CASE("basis gradient equals the finite difference of the synthesized field") {
  const DirectFieldModel fine(testsupport::direct_source(), MountModel{}, 1e-4);
  const Vec3 p(0.01, 0.005, -0.23);
  const FieldSample s = fine.evaluate(p, kTh);
  const FieldCommand c{1e-3, 1.1, 0.25};
  const Vec3 i = synthesize_tracking_currents(s, c, 5.0).i;
  const CoilArray coils = fine.coils(kTh);
  Mat3 D;
  for (int n = 0; n < 3; ++n) {
    const Vec3 e = 1e-4 * Vec3::Unit(n);
    D.col(n) = (actuation_matrix(p + e, coils) * i - actuation_matrix(p - e, coils) * i) / 2e-4;
  }
  CHECK(std::abs(gradient_disturbance(s, c, 5.0) - D.norm()) < 1e-6 * D.norm());
}

TEST_CASE("cycle-averaged force") {
  const Vec3 p(0, 0, -0.22);
  const FieldSample s = model().evaluate(p, kTh);
  RotatingFieldSpec spec;
  spec.axis = Vec3::UnitZ();
  const CycleForce vert = cycle_average_force(s, spec, 5.0);
  CHECK(std::hypot(vert.F_bar.x(), vert.F_bar.y()) < 1e-3 * std::abs(vert.F_z));

  spec.axis = Vec3::UnitX();
  const CycleForce f = cycle_average_force(s, spec, 5.0);
  RotatingFieldSpec shifted = spec;
  shifted.phase_offset = 0.37;
  CHECK((cycle_average_force(s, shifted, 5.0).F_bar - f.F_bar).norm() <= 1e-9 * f.F_bar.norm());

  RotatingFieldSpec dense = spec;
  dense.phase_samples = 720;
  CHECK((cycle_average_force(s, dense, 5.0).F_bar - f.F_bar).norm() < 1e-3 * f.F_bar.norm());

  RotatingFieldSpec strong = spec;
  strong.B0 = 2 * spec.B0;
  CHECK((cycle_average_force(s, strong, 5.0).F_bar - 2 * f.F_bar).norm() < 1e-12 * f.F_bar.norm());

  RotatingFieldSpec bad = spec;
  bad.phase_samples = 4;
  CHECK_THROWS_AS(cycle_average_force(s, bad, 5.0), ContractError);
}

TEST_CASE("lift profile is smooth along the axis") {
  // Over the depth range shared by all default tilts. Closer to the coils the
  // lift changes sign and varies faster than any 2.5 mm sampling resolves.
  RotatingFieldSpec spec;
  std::vector<double> zs;
  for (double z = -0.30; z <= -0.21 + 1e-12; z += 0.0025) zs.push_back(z);
  const auto prof = lift_depth_profile(model(), kTh, spec, zs, 5.0);
  REQUIRE(prof.size() == zs.size());
  double peak = 0.0;
  for (const auto& [z, f] : prof) peak = std::max(peak, std::abs(f));
  for (std::size_t k = 1; k < prof.size(); ++k) {
    CHECK(std::isfinite(prof[k].second));
    const double a = prof[k - 1].second, b = prof[k].second;
    CHECK(std::abs(b - a) <= 0.2 * std::max({std::abs(a), std::abs(b), 0.1 * peak}));
  }
}

TEST_CASE("library lift between nodes follows the direct model") {
  LibraryBuildSpec ls;
  ls.thetas = {kTh};
  ls.grid.xy_half = 0.005;
  const FieldLibrary lib = build_library(ls, testsupport::default_map());
  RotatingFieldSpec spec;
  const double top = z_limit(kTh, ClearanceModel{});
  double peak = 0.0;
  std::vector<std::pair<double, double>> pairs;
  for (double z = -0.29875; z < top - 0.005; z += 0.0025) {
    const double d = cycle_average_force(model(), Vec3(0, 0, z), kTh, spec, 5.0).F_z;
    const double l = cycle_average_force(lib, Vec3(0, 0, z), kTh, spec, 5.0).F_z;
    pairs.emplace_back(d, l);
    peak = std::max(peak, std::abs(d));
  }
  for (const auto& [d, l] : pairs) CHECK(std::abs(l - d) <= 0.05 * std::max(std::abs(d), 0.1 * peak));
}

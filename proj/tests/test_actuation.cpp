#include <cmath>
#include <random>

#include "doctest.h"
#include "reconfmag/actuation.hpp"
#include "reconfmag/error.hpp"
#include "reconfmag/library.hpp"
#include "test_support.hpp"

using namespace reconfmag;
using testsupport::direct_source;
using testsupport::map_source;

namespace {

double rel(const Vec3& a, const Vec3& b) { return (a - b).norm() / b.norm(); }

const double kTh45 = deg2rad(45.0);

}  // namespace

TEST_CASE("local coordinates decompose the offset exactly") {
  CoilPose pose = coil_poses(deg2rad(30.0), MountModel{})[1];
  const Vec3 on_axis = pose.center + 0.07 * pose.axis;
  LocalCoords lc = local_coords(on_axis, pose);
  CHECK(lc.r < 1e-15);
  CHECK(lc.z == doctest::Approx(0.07).epsilon(1e-14));
  CHECK(lc.e_r.norm() == doctest::Approx(1.0).epsilon(1e-15));

  lc = local_coords(pose.center, pose);
  CHECK(lc.r == 0.0);
  CHECK(lc.z == 0.0);
  CHECK(lc.e_r == pose.xdir);

  const Vec3 p(0.013, -0.021, -0.2);
  lc = local_coords(p, pose);
  CHECK((pose.center + lc.z * pose.axis + lc.r * lc.e_r - p).norm() < 1e-15);
}

TEST_CASE("on-axis columns are related by the threefold rotation") {
  DirectFieldModel model(map_source(), MountModel{}, 0.0025);
  const Vec3 p(0.0, 0.0, -0.22);
  const Mat3 A = model.evaluate(p, kTh45).A;
  const Mat3 R = c3_rotation(1);
  for (int k = 0; k < 3; ++k)
    CHECK((R * A.col(k) - A.col((k + 1) % 3)).norm() < 1e-12 * A.col(k).norm());
  const Vec3 B = field(A, Vec3(1, 1, 1));
  CHECK(std::hypot(B.x(), B.y()) < 1e-12 * std::abs(B.z()));
}

TEST_CASE("interpolated actuation matrix agrees with direct superposition") {
  DirectFieldModel fast(map_source(), MountModel{}, 0.0025);
  DirectFieldModel slow(direct_source(), MountModel{}, 0.0025);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uxy(-0.05, 0.05), uz(-0.3, -0.19);
  for (int n = 0; n < 20; ++n) {
    const Vec3 p(uxy(rng), uxy(rng), uz(rng));
    const Vec3 i(1.0, -0.4, 0.7);
    const Vec3 a = field(actuation_matrix(p, fast.coils(kTh45)), i);
    const Vec3 b = field(actuation_matrix(p, slow.coils(kTh45)), i);
    CHECK(rel(a, b) < 5e-3);
  }
}

TEST_CASE("field and gradient are linear in the currents") {
  DirectFieldModel model(map_source(), MountModel{}, 0.0025);
  const FieldSample s = model.evaluate(Vec3(0.01, 0.02, -0.25), kTh45);
  CHECK(field(s.A, Vec3::Zero()).norm() == 0.0);
  CHECK(field(s.A, Vec3(1, 0, 0)) == s.A.col(0));
  CHECK(field(s.A, Vec3(2.5, 0, 0)) == 2.5 * s.A.col(0));
  const Vec3 i(0.3, -1.2, 2.0), j(-0.7, 0.4, 1.1);
  CHECK((field(s.A, i + j) - field(s.A, i) - field(s.A, j)).norm() <= 1e-15 * field(s.A, i).norm());
  CHECK(field_gradient(s.grad, Vec3::Zero()).norm() == 0.0);
  CHECK(field_gradient(s.grad, Vec3(0, 1, 0)) == s.grad.G[1]);
  const Mat3 gij = field_gradient(s.grad, i + j);
  CHECK((gij - field_gradient(s.grad, i) - field_gradient(s.grad, j)).norm() <= 1e-14 * gij.norm());
}

TEST_CASE("combined gradient matches finite differences of the total field") {
  DirectFieldModel model(map_source(), MountModel{}, 0.0025);
  const Vec3 p(0.012, -0.008, -0.24);
  const Vec3 i(0.9, -0.3, 1.4);
  const CoilArray c = model.coils(kTh45);
  const Mat3 G = field_gradient(gradient_basis(p, c, 0.0025), i);
  Mat3 D;
  for (int n = 0; n < 3; ++n) {
    const Vec3 e = 0.0025 * Vec3::Unit(n);
    D.col(n) = (actuation_matrix(p + e, c) * i - actuation_matrix(p - e, c) * i) / 0.005;
  }
  // Different stencil orientations, so agreement is to truncation order.
  CHECK((G - D).norm() < 2e-3 * D.norm());
}

TEST_CASE("single-loop gradient matches the on-axis derivative") {
  const double R = 0.02, z = 0.03, delta = 2.5e-4;
  const CoilArray c = testsupport::single_loop_array(R);
  const Mat3 J = coil_jacobian(Vec3(0, 0, z), c, 0, delta, Mat3::Identity());
  const double s = R * R + z * z;
  const double exact = -1.5 * kMu0 * R * R * z / std::pow(s, 2.5);
  CHECK(std::abs(J(2, 2) - exact) < 1e-4 * std::abs(exact));
  // Halving the step cuts the error by about four.
  const double e1 = std::abs(coil_jacobian(Vec3(0, 0, z), c, 0, 2e-3, Mat3::Identity())(2, 2) - exact);
  const double e2 = std::abs(coil_jacobian(Vec3(0, 0, z), c, 0, 1e-3, Mat3::Identity())(2, 2) - exact);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("a very large loop is locally uniform") {
  const CoilArray c = testsupport::single_loop_array(100.0);
  const Vec3 p(0.01, -0.02, 0.005);
  const Mat3 J = coil_jacobian(p, c, 0, 0.0025, Mat3::Identity());
  const double B = coil_column(p, c, 0).norm();
  CHECK(J.norm() * 0.01 < 1e-6 * B);
}

TEST_CASE("gradient stencil leaving the map is an error naming the coil") {
  DirectFieldModel model(map_source(), MountModel{}, 0.0025);
  CHECK_THROWS_WITH_AS(model.evaluate(Vec3(0, 0, -0.9), kTh45), doctest::Contains("coil"),
                       DomainError);
}

TEST_CASE("least-norm currents") {
  const Vec3 zero = least_norm_currents(Mat3::Random(), Vec3::Zero(), 5.0).i;
  CHECK(zero.norm() == 0.0);

  const CurrentVector d = least_norm_currents(1e-3 * Mat3::Identity(), Vec3(1e-3, 0, 0), 5.0);
  CHECK(d.feasible);
  CHECK((d.i - Vec3(1, 0, 0)).norm() < 1e-15);

  CHECK_FALSE(least_norm_currents(1e-3 * Mat3::Identity(), Vec3(6e-3, 0, 0), 5.0).feasible);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 50; ++trial) {
    Mat3 A;
    for (int a = 0; a < 9; ++a) A.data()[a] = 1e-4 * n01(rng);
    const Vec3 B(1e-3 * n01(rng), 1e-3 * n01(rng), 1e-3 * n01(rng));
    const CurrentVector c = least_norm_currents(A, B, 5.0);
    CHECK((A * c.i - B).norm() <= 1e-9 * B.norm());
  }

  // Rank-two A: every exact solution differs from the least-norm one by a
  // null-space vector, so it can only be longer.
  Mat3 A;
  A << 1, 2, 3, 0, 1, 1, 1, 3, 4;
  A *= 1e-4;
  const Vec3 null = Vec3(1, 1, -1).normalized();
  CHECK((A * null).norm() < 1e-18);
  const Vec3 B = A * Vec3(0.5, -0.2, 0.9);
  const CurrentVector c = least_norm_currents(A, B, 5.0);
  for (double t : {-2.0, -0.3, 0.01, 0.7, 3.0}) {
    const Vec3 other = c.i + t * null;
    CHECK((A * other - B).norm() <= 1e-9 * B.norm());
    CHECK(c.i.norm() <= other.norm() + 1e-12);
  }
  CHECK_THROWS_WITH_AS(least_norm_currents(A, 1e-3 * null, 5.0),
                       doctest::Contains("unreachable field direction"), SynthesisError);
}

namespace {

LibraryBuildSpec tiny_spec() {
  LibraryBuildSpec spec;
  spec.thetas = {kTh45};
  spec.grid.xy_half = 0.0025;
  spec.grid.spacing = 0.0025;
  spec.grid.z_min = z_limit(kTh45, spec.clearance) - 0.005;
  return spec;
}

}  // namespace

TEST_CASE("library nodes reproduce pointwise evaluation") {
  const LibraryBuildSpec spec = tiny_spec();
  const FieldLibrary lib = build_library(spec, testsupport::default_map());
  REQUIRE(lib.grids().size() == 1);
  const ThetaGrid& g = lib.grids()[0];
  CHECK(g.node_count() == 27);
  DirectFieldModel model(map_source(), spec.mount, spec.fd_step);
  for (std::size_t iz = 0; iz < 3; ++iz)
    for (std::size_t iy = 0; iy < 3; ++iy)
      for (std::size_t ix = 0; ix < 3; ++ix) {
        const Vec3 p = g.node(ix, iy, iz);
        const FieldSample want = model.evaluate(p, kTh45);
        const FieldSample got = lib.query(p, kTh45);
        CHECK(got.A == want.A);
        for (int k = 0; k < 3; ++k) CHECK(got.grad.G[k] == want.grad.G[k]);
      }
  CHECK_THROWS_WITH_AS(lib.query(Vec3(0, 0, 0), kTh45), doctest::Contains("outside library grid"),
                       DomainError);
}

TEST_CASE("unknown tilt lists the available values") {
  LibraryBuildSpec spec = tiny_spec();
  spec.thetas = {deg2rad(35.0), deg2rad(45.0), deg2rad(55.0)};
  spec.grid.z_min = -0.215;
  const FieldLibrary lib = build_library(spec, testsupport::default_map());
  try {
    lib.query(Vec3(0, 0, -0.212), deg2rad(40.0));
    FAIL("expected an error");
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("35") != std::string::npos);
    CHECK(msg.find("45") != std::string::npos);
    CHECK(msg.find("55") != std::string::npos);
  }
}

TEST_CASE("cell-centre queries agree with direct evaluation") {
  LibraryBuildSpec spec;
  spec.thetas = {kTh45};
  spec.grid.xy_half = 0.01;
  spec.grid.z_min = -0.26;
  const FieldLibrary lib = build_library(spec, testsupport::default_map());
  DirectFieldModel slow(direct_source(), spec.mount, spec.fd_step);
  const Vec3 i(1.0, 0.5, -0.8);
  for (const Vec3 p : {Vec3(0.00125, 0.00125, -0.23875), Vec3(-0.00875, 0.00375, -0.25875),
                       Vec3(0.00625, -0.00625, -0.20125)}) {
    const Vec3 a = field(lib.query(p, kTh45).A, i);
    const Vec3 b = field(actuation_matrix(p, slow.coils(kTh45)), i);
    CHECK(rel(a, b) < 1e-2);
  }
}

TEST_CASE("library is C3 equivariant") {
  LibraryBuildSpec spec;
  spec.thetas = {kTh45};
  spec.grid.z_min = -0.25;
  const FieldLibrary lib = build_library(spec, testsupport::default_map());
  const Mat3 R = c3_rotation(1);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ur(0.0, 0.03), ua(0.0, 2 * kPi), uz(-0.25, -0.19);
  const Vec3 i(0.8, -0.5, 1.3);
  // Rotating the point by 120 degrees hands coil k's role to coil k+1.
  const Vec3 i_shift(i[2], i[0], i[1]);
  for (int n = 0; n < 30; ++n) {
    const double r = ur(rng), a = ua(rng);
    const Vec3 p(r * std::cos(a), r * std::sin(a), uz(rng));
    const Vec3 lhs = field(lib.query(R * p, kTh45).A, i_shift);
    const Vec3 rhs = R * field(lib.query(p, kTh45).A, i);
    CHECK(rel(lhs, rhs) < 1e-2);
  }
}

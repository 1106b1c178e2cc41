#include <benchmark/benchmark.h>

#include <random>

#include "reconfmag/actuation.hpp"
#include "reconfmag/coil_field.hpp"
#include "reconfmag/config.hpp"
#include "reconfmag/library.hpp"
#include "reconfmag/library_io.hpp"
#include "reconfmag/loading.hpp"
#include "reconfmag/schedule.hpp"
#include "reconfmag/workspace.hpp"

using namespace reconfmag;

namespace {

const ToolConfig& config() {
  static const ToolConfig cfg;
  return cfg;
}

const std::shared_ptr<const AxisymmetricFieldMap>& coil_map() {
  static const auto map = build_coil_map(config().coil, config().library.map);
  return map;
}

const FieldLibrary& library() {
  static const FieldLibrary lib = build_library(config().library_spec(), coil_map());
  return lib;
}

void BM_LoopField(benchmark::State& st) {
  double r = 0.01;
  for (auto _ : st) {
    benchmark::DoNotOptimize(loop_field(0.02, 1.0, r, 0.05));
    r = r < 0.1 ? r + 1e-5 : 0.01;
  }
}
BENCHMARK(BM_LoopField);

void BM_CoilUnitField(benchmark::State& st) {
  const CoilSpec spec = config().coil;
  for (auto _ : st) benchmark::DoNotOptimize(coil_unit_field(spec, 0.04, 0.09));
}
BENCHMARK(BM_CoilUnitField);

void BM_MapSample(benchmark::State& st) {
  const auto& map = *coil_map();
  double r = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(map.sample(r, 0.12));
    r = r < 0.2 ? r + 1.3e-4 : 0.0;
  }
}
BENCHMARK(BM_MapSample);

void BM_LibraryQuery(benchmark::State& st) {
  const FieldLibrary& lib = library();
  const double th = config().library.thetas[1];
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.04, 0.04), uz(-0.28, -0.2);
  for (auto _ : st) benchmark::DoNotOptimize(lib.query(Vec3(u(rng), u(rng), uz(rng)), th));
}
BENCHMARK(BM_LibraryQuery);

void BM_LibraryBuild(benchmark::State& st) {
  LibraryBuildSpec spec = config().library_spec();
  spec.grid.spacing = 0.005;
  for (auto _ : st) benchmark::DoNotOptimize(build_library(spec, coil_map()));
}
BENCHMARK(BM_LibraryBuild)->Unit(benchmark::kMillisecond);

void BM_BMin512(benchmark::State& st) {
  const auto dirs = fibonacci_sphere(512);
  const Mat3 A = library().query(Vec3(0.01, 0.0, -0.25), config().library.thetas[0]).A;
  for (auto _ : st) benchmark::DoNotOptimize(b_min(A, dirs, 5.0));
}
BENCHMARK(BM_BMin512);

void BM_BMinExact(benchmark::State& st) {
  const Mat3 A = library().query(Vec3(0.01, 0.0, -0.25), config().library.thetas[0]).A;
  for (auto _ : st) benchmark::DoNotOptimize(b_min_exact(A, 5.0));
}
BENCHMARK(BM_BMinExact);

void BM_WorkspaceSweep(benchmark::State& st) {
  const FieldLibrary& lib = library();
  for (auto _ : st)
    benchmark::DoNotOptimize(feasible_workspace(lib, config().library.thetas[1], config().feasibility));
}
BENCHMARK(BM_WorkspaceSweep)->Unit(benchmark::kMillisecond);

void BM_CycleForce(benchmark::State& st) {
  const FieldSample s = library().query(Vec3(0.0, 0.0, -0.22), config().library.thetas[2]);
  const RotatingFieldSpec spec;
  for (auto _ : st) benchmark::DoNotOptimize(cycle_average_force(s, spec, 5.0));
}
BENCHMARK(BM_CycleForce);

void BM_SimulateAuto(benchmark::State& st) {
  const TrajectorySpec traj = default_trajectory();
  const ModeSpec mode = ModeSpec::parse("auto", config().schedule);
  SimSettings settings = config().sim;
  settings.clearance = config().clearance;
  for (auto _ : st)
    benchmark::DoNotOptimize(simulate(traj, mode, config().robot, library(), settings));
}
BENCHMARK(BM_SimulateAuto)->Unit(benchmark::kMillisecond);

void BM_EncodeLibrary(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(encode_library(library()));
}
BENCHMARK(BM_EncodeLibrary)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

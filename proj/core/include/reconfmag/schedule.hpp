#pragma once

#include <string>
#include <vector>

#include "reconfmag/actuation.hpp"
#include "reconfmag/mechanism.hpp"
#include "reconfmag/types.hpp"

namespace reconfmag {

// Piecewise-constant tilt as a function of world depth z. thetas[r] is used
// in band r, where r counts the breakpoints at or below z.
struct ThetaSchedule {
  std::vector<double> breakpoints{0.035, 0.045};  // m, world frame
  std::vector<double> thetas{deg2rad(35.0), deg2rad(45.0), deg2rad(55.0)};
  double hysteresis = 0.0;  // m

  void validate() const;
  int regime(double z_world) const;
};

// previous_theta may be NaN (no history); hysteresis is then ignored.
double schedule_theta(const ThetaSchedule& schedule, double z_world, double previous_theta);

struct ModeSpec {
  bool scheduled = false;
  double theta = 0.0;  // rad, fixed mode only
  ThetaSchedule schedule;

  // "fixed:<deg>" or "auto".
  static ModeSpec parse(const std::string& text, const ThetaSchedule& schedule = {});
  std::string label() const;
};

struct RobotParams {
  double dipole_moment = 1e-4;         // A m^2
  double forward_speed_per_hz = 4e-4;  // m/s per Hz
  double drag_coefficient = 6e-3;      // N s/m
  double rotation_freq = 5.0;          // Hz

  void validate() const;
};

struct TrajectorySpec {
  std::vector<Vec3> waypoints;  // world frame, m
  std::vector<double> speeds;   // one per segment, m/s
  double lower_boundary_z = 0.075;

  void validate() const;
  // SHA-256 over waypoints and boundary; used to enforce identical paths.
  std::string fingerprint() const;
};

struct SimSettings {
  double dt = 0.01;
  double B0 = 1e-3;
  double coil_limit = 5.0;       // per-coil saturation, A
  double sync_fraction = 0.5;    // step-out when |B| < sync_fraction * B0
  double sink_speed = 2e-4;      // m/s, net gravity minus buoyancy
  double standoff = 0.0;         // m below z_limit at the lower boundary
  double tube_radius = 0.002;    // m, lateral confinement around the path
  int force_phase_samples = 24;
  double max_time_factor = 3.0;  // give up after this multiple of the nominal duration
  ClearanceModel clearance;

  void validate() const;
};

struct SimStep {
  double t = 0.0;
  Vec3 position = Vec3::Zero();  // world
  Vec3 mech_point = Vec3::Zero();
  double theta = 0.0;
  Vec3 B_cmd = Vec3::Zero();
  Vec3 B_applied = Vec3::Zero();
  Vec3 i_request = Vec3::Zero();
  Vec3 i_applied = Vec3::Zero();
  bool clamped = false;
  bool synced = true;
  bool feasible = true;
  int segment = 0;
};

struct SimLog {
  double dt = 0.01;
  std::string mode;
  bool completed = false;
  std::vector<SimStep> steps;
};

// Mechanism-frame point probed for a robot at world depth z_world.
Vec3 mechanism_point(double z_world, double theta, const TrajectorySpec& traj,
                     const SimSettings& settings);

SimLog simulate(const TrajectorySpec& traj, const ModeSpec& mode, const RobotParams& robot,
                const FieldModel& model, const SimSettings& settings);

struct WindowStat {
  double t_start = 0.0;
  double e_over_b2 = 0.0;  // A^2/T^2, NaN when the mean field is zero
  double i_peak = 0.0;     // A
  bool event = false;
  double mean_z = 0.0;
  int regime = 0;
};

struct WindowMetrics {
  std::vector<WindowStat> windows;
  double median_e_over_b2 = 0.0;
  double event_fraction = 0.0;
  std::size_t unused_steps = 0;
};

// Non-overlapping 1 s windows. Regimes are assigned from the mean world z of
// each window using `bands` (schedule breakpoints).
WindowMetrics window_metrics(const SimLog& log, double threshold = 7.0,
                             const std::vector<double>& bands = {0.035, 0.045});

struct RegimeStat {
  std::size_t windows = 0;
  std::size_t events = 0;
  double rate() const;  // NaN when there are no windows
  double median_e_over_b2 = 0.0;
};

struct ModeReport {
  std::string mode;
  bool completed = false;
  double median_e_over_b2 = 0.0;
  double event_fraction = 0.0;
  std::vector<RegimeStat> regimes;  // deep, mid, shallow for the default bands
};

struct ModeRun {
  TrajectorySpec trajectory;
  ModeSpec mode;
};

std::vector<ModeReport> compare_modes(const std::vector<ModeRun>& runs, const RobotParams& robot,
                                      const FieldModel& model, const SimSettings& settings,
                                      double threshold = 7.0);

ModeReport summarize(const std::string& mode, const SimLog& log, const WindowMetrics& m,
                     const std::vector<double>& bands);

// Three-regime surrogate path: deep straight run, mid-depth arc, shallow ramp.
TrajectorySpec default_trajectory();

}  // namespace reconfmag

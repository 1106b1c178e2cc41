#include "reconfmag/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "reconfmag/digest.hpp"
#include "reconfmag/error.hpp"
#include "reconfmag/loading.hpp"

namespace reconfmag {

void ThetaSchedule::validate() const {
  if (thetas.size() != breakpoints.size() + 1)
    throw ConfigError("schedule: need exactly one more theta than breakpoints");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw ConfigError("schedule: breakpoints must be strictly increasing");
  if (!(hysteresis >= 0.0)) throw ConfigError("schedule: hysteresis must be non-negative");
}

int ThetaSchedule::regime(double z) const {
  return static_cast<int>(std::upper_bound(breakpoints.begin(), breakpoints.end(), z) -
                          breakpoints.begin());
}

double schedule_theta(const ThetaSchedule& s, double z, double previous_theta) {
  const int r = s.regime(z);
  if (s.hysteresis > 0.0 && std::isfinite(previous_theta)) {
    for (std::size_t k = 0; k < s.thetas.size(); ++k) {
      if (std::abs(s.thetas[k] - previous_theta) > 1e-12) continue;
      const int prev = static_cast<int>(k);
      if (prev == r) break;
      const double lo = prev == 0 ? -std::numeric_limits<double>::infinity()
                                  : s.breakpoints[static_cast<std::size_t>(prev - 1)];
      const double hi = prev == static_cast<int>(s.breakpoints.size())
                            ? std::numeric_limits<double>::infinity()
                            : s.breakpoints[static_cast<std::size_t>(prev)];
      if (z >= lo - s.hysteresis && z < hi + s.hysteresis) return previous_theta;
      break;
    }
  }
  return s.thetas[static_cast<std::size_t>(r)];
}

ModeSpec ModeSpec::parse(const std::string& text, const ThetaSchedule& schedule) {
  ModeSpec m;
  m.schedule = schedule;
  if (text == "auto") {
    m.scheduled = true;
    return m;
  }
  const std::string prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const std::string num = text.substr(prefix.size());
      const double deg = std::stod(num, &used);
      if (used == num.size()) {
        m.theta = deg2rad(deg);
        return m;
      }
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("mode must be 'auto' or 'fixed:<deg>', got '" + text + "'");
}

std::string ModeSpec::label() const {
  if (scheduled) return "auto";
  std::ostringstream os;
  os << "fixed:" << rad2deg(theta);
  return os.str();
}

void RobotParams::validate() const {
  if (!(dipole_moment > 0.0 && forward_speed_per_hz > 0.0 && drag_coefficient > 0.0 &&
        rotation_freq > 0.0))
    throw ConfigError("robot: all parameters must be positive");
}

void TrajectorySpec::validate() const {
  if (waypoints.size() < 2) throw ConfigError("trajectory: need at least 2 waypoints");
  if (speeds.size() != waypoints.size() - 1)
    throw ConfigError("trajectory: need one speed per segment");
  for (double v : speeds)
    if (!(v > 0.0)) throw ConfigError("trajectory: speeds must be positive");
}

std::string TrajectorySpec::fingerprint() const {
  std::vector<double> buf;
  for (const Vec3& w : waypoints) buf.insert(buf.end(), {w.x(), w.y(), w.z()});
  buf.push_back(lower_boundary_z);
  return sha256_hex(buf.data(), buf.size() * sizeof(double));
}

void SimSettings::validate() const {
  if (!(dt > 0.0 && dt <= 0.02)) throw ConfigError("sim: dt must lie in (0, 0.02] s");
  if (!(B0 > 0.0)) throw ConfigError("sim: B0 must be positive");
  if (!(coil_limit > 0.0)) throw ConfigError("sim: coil_limit must be positive");
  if (!(sync_fraction >= 0.0 && sync_fraction <= 1.0))
    throw ConfigError("sim: sync_fraction must lie in [0, 1]");
  if (!(standoff >= 0.0 && tube_radius >= 0.0 && sink_speed >= 0.0))
    throw ConfigError("sim: standoff, tube_radius and sink_speed must be non-negative");
  if (force_phase_samples < 8) throw ConfigError("sim: force_phase_samples must be >= 8");
  if (!(max_time_factor >= 1.0)) throw ConfigError("sim: max_time_factor must be >= 1");
}

Vec3 mechanism_point(double z_world, double theta, const TrajectorySpec& traj,
                     const SimSettings& settings) {
  const double depth_below_boundary = traj.lower_boundary_z - z_world;
  return Vec3(0.0, 0.0,
              z_limit(theta, settings.clearance) - settings.standoff - depth_below_boundary);
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Keeps the robot inside a tube of the given radius around segment [a, b].
Vec3 confine(const Vec3& p, const Vec3& a, const Vec3& b, double radius) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  const Vec3 foot = a + t * ab;
  const Vec3 off = p - foot;
  const double d = off.norm();
  return d > radius ? Vec3(foot + off * (radius / d)) : p;
}

Vec3 clamp_currents(const Vec3& i, double lim, bool& clamped) {
  Vec3 out = i.cwiseMax(-lim).cwiseMin(lim);
  clamped = (out - i).cwiseAbs().maxCoeff() > 0.0;
  return out;
}

}  // namespace

SimLog simulate(const TrajectorySpec& traj, const ModeSpec& mode, const RobotParams& robot,
                const FieldModel& model, const SimSettings& st) {
  traj.validate();
  robot.validate();
  st.validate();
  if (mode.scheduled) mode.schedule.validate();

  SimLog log;
  log.dt = st.dt;
  log.mode = mode.label();
  const std::size_t window = static_cast<std::size_t>(std::llround(1.0 / st.dt));
  const std::size_t nseg = traj.waypoints.size() - 1;

  double nominal = 0.0;
  for (std::size_t s = 0; s < nseg; ++s)
    nominal += (traj.waypoints[s + 1] - traj.waypoints[s]).norm() / traj.speeds[s];
  const double t_max = st.max_time_factor * nominal + 1.0;

  Vec3 pos = traj.waypoints.front();
  std::size_t seg = 0;
  // Skip zero-length segments up front.
  while (seg < nseg && (traj.waypoints[seg + 1] - pos).norm() == 0.0) ++seg;
  Vec3 heading = Vec3::UnitX();
  for (std::size_t s = 0; s < nseg; ++s) {
    const Vec3 d = traj.waypoints[s + 1] - traj.waypoints[s];
    if (d.norm() > 0.0) {
      heading = d.normalized();
      break;
    }
  }
  double freq = robot.rotation_freq;
  double prev_theta = std::numeric_limits<double>::quiet_NaN();
  bool parked = seg >= nseg;
  double t = 0.0;

  while (true) {
    if (parked && log.steps.size() >= window && log.steps.size() % window == 0) break;
    if (!parked && t > t_max) parked = true;

    if (!parked) {
      const Vec3 to = traj.waypoints[seg + 1] - pos;
      if (to.norm() > 0.0) heading = to.normalized();
      freq = traj.speeds[seg] / robot.forward_speed_per_hz;
    }
    const double theta =
        mode.scheduled ? schedule_theta(mode.schedule, pos.z(), prev_theta) : mode.theta;
    const Vec3 q = mechanism_point(pos.z(), theta, traj, st);
    FieldSample fs;
    try {
      fs = model.evaluate(q, theta);
    } catch (const DomainError& e) {
      std::ostringstream os;
      os << "trajectory leaves field coverage at world (" << pos.x() << ", " << pos.y() << ", "
         << pos.z() << "), mechanism z=" << q.z() << ": " << e.what();
      throw DomainError(os.str());
    }

    const auto [e1, e2] = rotation_plane_basis(heading);
    const double phase = 2.0 * kPi * freq * t;
    const Vec3 b = std::cos(phase) * e1 + std::sin(phase) * e2;

    SimStep step;
    step.t = t;
    step.position = pos;
    step.mech_point = q;
    step.theta = theta;
    step.segment = static_cast<int>(std::min(seg, nseg - 1));
    step.B_cmd = st.B0 * b;
    const CurrentVector cv = pseudo_inverse_currents(fs.A, step.B_cmd, st.coil_limit);
    step.i_request = cv.i;
    step.feasible = cv.feasible;
    step.i_applied = clamp_currents(cv.i, st.coil_limit, step.clamped);
    step.B_applied = fs.A * step.i_applied;
    step.synced = step.B_applied.norm() >= st.sync_fraction * st.B0;
    log.steps.push_back(step);

    if (!parked) {
      // Cycle-averaged dipole force with the same saturation applied per phase.
      Vec3 force = Vec3::Zero();
      const int np = st.force_phase_samples;
      for (int j = 0; j < np; ++j) {
        const double ph = 2.0 * kPi * (j + 0.5) / np;
        const Vec3 bj = st.B0 * (std::cos(ph) * e1 + std::sin(ph) * e2);
        bool c = false;
        const Vec3 ij = clamp_currents(pseudo_inverse_currents(fs.A, bj, st.coil_limit).i,
                                       st.coil_limit, c);
        const Vec3 Bj = fs.A * ij;
        const double bn = Bj.norm();
        if (bn == 0.0) continue;
        force += field_gradient(fs.grad, ij).transpose() * (robot.dipole_moment / bn * Bj);
      }
      force /= np;

      const double speed = step.synced ? robot.forward_speed_per_hz * freq : 0.0;
      const Vec3 v = speed * heading + force / robot.drag_coefficient -
                     st.sink_speed * Vec3::UnitZ();
      const Vec3 target = traj.waypoints[seg + 1];
      const double before = (target - pos).norm();
      Vec3 next = pos + st.dt * v;
      next = confine(next, traj.waypoints[seg], target, st.tube_radius);
      const double advance = before - (target - next).norm();
      if ((target - next).norm() <= std::max(advance, 0.0) || (target - next).norm() < 1e-9) {
        next = target;
        ++seg;
        while (seg < nseg && (traj.waypoints[seg + 1] - next).norm() == 0.0) ++seg;
        if (seg >= nseg) {
          parked = true;
          log.completed = true;
        }
      }
      pos = next;
    }
    prev_theta = theta;
    t += st.dt;
  }
  return log;
}

WindowMetrics window_metrics(const SimLog& log, double threshold,
                             const std::vector<double>& bands) {
  const std::size_t w = static_cast<std::size_t>(std::llround(1.0 / log.dt));
  if (log.steps.size() < w) throw ContractError("window_metrics: log shorter than one 1 s window");
  ThetaSchedule band_lookup;
  band_lookup.breakpoints = bands;

  WindowMetrics m;
  const std::size_t nw = log.steps.size() / w;
  m.unused_steps = log.steps.size() - nw * w;
  std::vector<double> defined;
  std::size_t events = 0;
  for (std::size_t k = 0; k < nw; ++k) {
    double isq = 0.0, bsum = 0.0, zsum = 0.0, peak = 0.0;
    for (std::size_t j = k * w; j < (k + 1) * w; ++j) {
      const SimStep& s = log.steps[j];
      const double in = s.i_applied.norm();
      isq += in * in;
      bsum += s.B_applied.norm();
      zsum += s.position.z();
      peak = std::max(peak, in);
    }
    WindowStat ws;
    ws.t_start = log.steps[k * w].t;
    const double bmean = bsum / w;
    ws.e_over_b2 = bmean > 0.0 ? (isq / w) / (bmean * bmean) : std::numeric_limits<double>::quiet_NaN();
    ws.i_peak = peak;
    ws.event = peak >= threshold;
    ws.mean_z = zsum / w;
    ws.regime = band_lookup.regime(ws.mean_z);
    if (std::isfinite(ws.e_over_b2)) defined.push_back(ws.e_over_b2);
    events += ws.event ? 1 : 0;
    m.windows.push_back(ws);
  }
  m.event_fraction = static_cast<double>(events) / static_cast<double>(nw);
  m.median_e_over_b2 = median(defined);
  return m;
}

double RegimeStat::rate() const {
  return windows ? static_cast<double>(events) / static_cast<double>(windows)
                 : std::numeric_limits<double>::quiet_NaN();
}

ModeReport summarize(const std::string& mode, const SimLog& log, const WindowMetrics& m,
                     const std::vector<double>& bands) {
  ModeReport r;
  r.mode = mode;
  r.completed = log.completed;
  r.median_e_over_b2 = m.median_e_over_b2;
  r.event_fraction = m.event_fraction;
  r.regimes.resize(bands.size() + 1);
  std::vector<std::vector<double>> per(bands.size() + 1);
  for (const WindowStat& w : m.windows) {
    RegimeStat& rs = r.regimes[static_cast<std::size_t>(w.regime)];
    ++rs.windows;
    rs.events += w.event ? 1 : 0;
    if (std::isfinite(w.e_over_b2)) per[static_cast<std::size_t>(w.regime)].push_back(w.e_over_b2);
  }
  for (std::size_t k = 0; k < per.size(); ++k) r.regimes[k].median_e_over_b2 = median(per[k]);
  return r;
}

std::vector<ModeReport> compare_modes(const std::vector<ModeRun>& runs, const RobotParams& robot,
                                      const FieldModel& model, const SimSettings& settings,
                                      double threshold) {
  if (runs.empty()) throw ContractError("compare_modes: no modes given");
  const std::string ref = runs.front().trajectory.fingerprint();
  for (const ModeRun& r : runs)
    if (r.trajectory.fingerprint() != ref)
      throw ContractError("compare_modes: modes do not share the same waypoints and lower boundary");
  std::vector<ModeReport> out;
  for (const ModeRun& r : runs) {
    const std::vector<double>& bands = r.mode.schedule.breakpoints;
    const SimLog log = simulate(r.trajectory, r.mode, robot, model, settings);
    out.push_back(summarize(r.mode.label(), log, window_metrics(log, threshold, bands), bands));
  }
  return out;
}

TrajectorySpec default_trajectory() {
  TrajectorySpec t;
  // Deep straight run.
  t.waypoints.emplace_back(0.0, 0.0, 0.030);
  t.waypoints.emplace_back(0.030, 0.0, 0.030);
  // Mid-depth half circle, climbing slowly through the cruise band.
  const int n_arc = 8;
  for (int k = 0; k <= n_arc; ++k) {
    const double a = -kPi / 2.0 + kPi * k / n_arc;
    t.waypoints.emplace_back(0.030 + 0.020 * std::cos(a), 0.020 + 0.020 * std::sin(a),
                             0.036 + 0.008 * k / n_arc);
  }
  // Shallow ramp towards the lower boundary.
  t.waypoints.emplace_back(0.0, 0.040, 0.070);
  t.speeds.assign(t.waypoints.size() - 1, 0.002);
  return t;
}

}  // namespace reconfmag

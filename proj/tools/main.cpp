// reconfmag command-line front end.
//
// Exit codes: 0 success, 1 a library or I/O error, 2 bad usage.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reconfmag/config.hpp"
#include "reconfmag/error.hpp"
#include "reconfmag/fileio.hpp"
#include "reconfmag/library.hpp"
#include "reconfmag/library_io.hpp"
#include "reconfmag/loading.hpp"
#include "reconfmag/mechanism.hpp"
#include "reconfmag/schedule.hpp"
#include "reconfmag/workspace.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace reconfmag;

namespace {

constexpr int kOutputSchemaVersion = 1;

struct Globals {
  std::string config_path;
  std::string library_path;
  std::string out_dir;
};

ToolConfig load(const Globals& g) {
  ToolConfig cfg = g.config_path.empty() ? ToolConfig{} : load_config(g.config_path);
  if (g.config_path.empty()) cfg.sim.clearance = cfg.clearance;
  if (!g.library_path.empty()) cfg.paths.library = g.library_path;
  if (!g.out_dir.empty()) cfg.paths.output_dir = g.out_dir;
  cfg.validate();
  return cfg;
}

std::string out_path(const ToolConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.paths.output_dir);
  return (fs::path(cfg.paths.output_dir) / name).string();
}

void emit(const std::string& path, const std::string& text) {
  write_file_atomic(path, text);
  std::cout << "wrote " << path << "\n";
}

std::string dump(json j) {
  j["schema_version"] = kOutputSchemaVersion;
  return j.dump(2) + "\n";
}

// Fixed-precision CSV writer; every header names its unit in brackets.
class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    os_ << std::setprecision(12);
    for (std::size_t k = 0; k < header.size(); ++k) os_ << (k ? "," : "") << header[k];
    os_ << "\n";
  }
  template <typename... T>
  void row(const T&... v) {
    bool first = true;
    ((os_ << (first ? "" : ",") << v, first = false), ...);
    os_ << "\n";
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

std::string deg_tag(double deg) {
  std::ostringstream os;
  os << std::llround(deg);
  return os.str();
}

// Loads the library named in the config. When the file does not exist yet
// it is built in memory from the same config.
FieldLibrary obtain_library(const ToolConfig& cfg) {
  if (fs::exists(cfg.paths.library)) return read_library(cfg.paths.library);
  std::cerr << "note: " << cfg.paths.library << " not found, building the library in memory\n";
  return build_library(cfg.library_spec());
}

double library_theta(const FieldLibrary& lib, double deg) {
  const double th = deg2rad(deg);
  lib.theta_index(th);  // throws with the available list
  return th;
}

std::vector<double> axis_depths(const FieldLibrary& lib, double theta) {
  const ThetaGrid& g = lib.grids()[lib.theta_index(theta)];
  if (g.nx % 2 == 0 || g.ny % 2 == 0)
    throw DomainError("library grid has no node column on the axis");
  std::vector<double> zs;
  for (std::size_t iz = 0; iz < g.nz; ++iz) zs.push_back(g.node(g.nx / 2, g.ny / 2, iz).z());
  return zs;
}

// ---------------------------------------------------------------- trajectory

TrajectorySpec trajectory_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("trajectory parse error: ") + e.what());
  }
  TrajectorySpec t;
  try {
    for (const auto& w : j.at("waypoints")) {
      if (w.size() != 3) throw ConfigError("trajectory: each waypoint needs 3 coordinates");
      t.waypoints.emplace_back(w[0].get<double>(), w[1].get<double>(), w[2].get<double>());
    }
    const json& sp = j.at("speeds");
    if (sp.is_number())
      t.speeds.assign(t.waypoints.empty() ? 0 : t.waypoints.size() - 1, sp.get<double>());
    else
      t.speeds = sp.get<std::vector<double>>();
    if (j.contains("lower_boundary_z")) t.lower_boundary_z = j["lower_boundary_z"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("trajectory: ") + e.what());
  }
  t.validate();
  return t;
}

json trajectory_to_json(const TrajectorySpec& t) {
  json w = json::array();
  for (const Vec3& p : t.waypoints) w.push_back({p.x(), p.y(), p.z()});
  return {{"waypoints", w}, {"speeds", t.speeds}, {"lower_boundary_z", t.lower_boundary_z}};
}

// ---------------------------------------------------------------- metrics

const char* kRegimeNames[] = {"deep", "mid", "shallow"};

std::string regime_name(std::size_t k, std::size_t n) {
  if (n == 3) return kRegimeNames[k];
  return "band" + std::to_string(k);
}

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const ModeReport& r, const WindowMetrics& m, const TrajectorySpec& traj) {
  json regimes = json::array();
  for (std::size_t k = 0; k < r.regimes.size(); ++k) {
    const RegimeStat& s = r.regimes[k];
    regimes.push_back({{"name", regime_name(k, r.regimes.size())},
                       {"windows", s.windows},
                       {"events", s.events},
                       {"event_rate", nan_safe(s.rate())},
                       {"median_e_over_b2_A2_per_T2", nan_safe(s.median_e_over_b2)}});
  }
  return {{"mode", r.mode},
          {"completed", r.completed},
          {"trajectory_fingerprint", traj.fingerprint()},
          {"windows", m.windows.size()},
          {"unused_steps", m.unused_steps},
          {"median_e_over_b2_A2_per_T2", nan_safe(r.median_e_over_b2)},
          {"event_fraction", r.event_fraction},
          {"regimes", regimes}};
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string fmt(const json& v, int prec = 4) {
  if (v.is_null()) return "n/a";
  std::ostringstream os;
  os << std::setprecision(prec) << v.get<double>();
  return os.str();
}

std::string compare_table_md(const std::vector<json>& ms) {
  std::ostringstream os;
  os << "| mode | median E/B^2 [A^2/T^2] | P(I_peak >= 7 A) | deep | mid | shallow | completed |\n"
     << "|---|---|---|---|---|---|---|\n";
  for (const json& m : ms) {
    os << "| " << m.at("mode").get<std::string>() << " | " << fmt(m.at("median_e_over_b2_A2_per_T2"))
       << " | " << fmt(m.at("event_fraction"));
    for (const json& r : m.at("regimes")) os << " | " << fmt(r.at("event_rate"), 3);
    os << " | " << (m.at("completed").get<bool>() ? "yes" : "no") << " |\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- commands

int cmd_build_library(const Globals& g) {
  const ToolConfig cfg = load(g);
  const FieldLibrary lib = build_library(cfg.library_spec());
  write_library(lib, cfg.paths.library);
  std::cout << "wrote " << cfg.paths.library << " (" << lib.grids().size() << " inclinations, "
            << lib.payload().size() * sizeof(double) << " payload bytes)\n"
            << "content sha256 " << library_content_hash(lib) << "\n";
  return 0;
}

int cmd_mechanism_sweep(const Globals& g, int samples) {
  const ToolConfig cfg = load(g);
  const LinkageGeometry& geo = cfg.linkage;
  Csv csv({"s[m]", "theta[deg]", "E_x[m]", "E_z[m]", "z_limit[m]"});
  for (int k = 0; k < samples; ++k) {
    const double s =
        std::min(geo.s_max, geo.s_min + (geo.s_max - geo.s_min) * k / std::max(samples - 1, 1));
    const MechanismState st = forward_kinematics(geo, s);
    csv.row(s, rad2deg(st.theta), st.point_E.x(), st.point_E.y(), z_limit(st.theta, cfg.clearance));
  }
  emit(out_path(cfg, "mechanism_sweep.csv"), csv.str());
  const auto [lo, hi] = theta_bounds(geo);
  std::cout << "theta range " << rad2deg(lo) << " .. " << rad2deg(hi) << " deg\n";
  return 0;
}

int cmd_workspace(const Globals& g, double theta_deg, std::optional<double> breq_mT,
                  std::optional<double> imax) {
  ToolConfig cfg = load(g);
  if (breq_mT) cfg.feasibility.B_req = *breq_mT * 1e-3;
  if (imax) cfg.feasibility.I_max = *imax;
  cfg.feasibility.validate();
  const FieldLibrary lib = obtain_library(cfg);
  const double th = library_theta(lib, theta_deg);
  const WorkspaceReport rep = feasible_workspace(lib, th, cfg.feasibility);

  Csv nodes({"x[m]", "y[m]", "z[m]", "B_min[T]", "feasible[bool]"});
  for (std::size_t n = 0; n < rep.nodes.size(); ++n) {
    if (!std::isfinite(rep.b_min[n])) continue;
    const Vec3& p = rep.nodes[n];
    nodes.row(p.x(), p.y(), p.z(), rep.b_min[n], int(rep.feasible[n]));
  }
  Csv prof({"z[m]", "log10_u[log10(J/m^3)]"});
  for (const auto& [z, lu] : rep.energy_depth_profile) prof.row(z, lu);

  const std::string tag = deg_tag(theta_deg);
  emit(out_path(cfg, "workspace_" + tag + ".csv"), nodes.str());
  emit(out_path(cfg, "energy_profile_" + tag + ".csv"), prof.str());
  emit(out_path(cfg, "workspace_" + tag + ".json"),
       dump({{"theta_deg", theta_deg},
             {"hull_volume_m3", rep.hull_volume},
             {"feasible_count", rep.feasible_count},
             {"B_req_T", cfg.feasibility.B_req},
             {"I_max_A", cfg.feasibility.I_max},
             {"library_sha256", library_content_hash(lib)}}));
  std::cout << "hull volume " << rep.hull_volume << " m^3, " << rep.feasible_count
            << " feasible nodes\n";
  return 0;
}

int cmd_gradient_map(const Globals& g, double theta_deg, double b0_mT,
                     const std::vector<double>& elevations, int n_alpha) {
  const ToolConfig cfg = load(g);
  const FieldLibrary lib = obtain_library(cfg);
  const double th = library_theta(lib, theta_deg);
  Csv csv({"z[m]", "epsilon[deg]", "M[T/m]"});
  for (double z : axis_depths(lib, th)) {
    const FieldSample s = lib.query(Vec3(0.0, 0.0, z), th);
    for (double e : elevations)
      csv.row(z, e, azimuth_average(s, deg2rad(e), b0_mT * 1e-3, cfg.feasibility.I_max, n_alpha));
  }
  emit(out_path(cfg, "gradient_map_" + deg_tag(theta_deg) + ".csv"), csv.str());
  return 0;
}

int cmd_lift_map(const Globals& g, double theta_deg, double b0_mT, const std::string& axis) {
  const ToolConfig cfg = load(g);
  const FieldLibrary lib = obtain_library(cfg);
  const double th = library_theta(lib, theta_deg);
  RotatingFieldSpec spec;
  spec.B0 = b0_mT * 1e-3;
  spec.dipole_moment = cfg.robot.dipole_moment;
  spec.axis = axis == "z" ? Vec3::UnitZ() : (axis == "y" ? Vec3::UnitY() : Vec3::UnitX());
  Csv csv({"z[m]", "F_z[N]"});
  for (const auto& [z, fz] :
       lift_depth_profile(lib, th, spec, axis_depths(lib, th), cfg.feasibility.I_max))
    csv.row(z, fz);
  emit(out_path(cfg, "lift_map_" + deg_tag(theta_deg) + ".csv"), csv.str());
  return 0;
}

std::string mode_tag(const std::string& label) {
  std::string t = label;
  std::replace(t.begin(), t.end(), ':', '_');
  return t;
}

int cmd_schedule_sim(const Globals& g, const std::string& mode_text, const std::string& traj_path) {
  const ToolConfig cfg = load(g);
  const TrajectorySpec traj =
      traj_path.empty() ? default_trajectory() : trajectory_from_json(read_file(traj_path));
  const ModeSpec mode = ModeSpec::parse(mode_text, cfg.schedule);
  const FieldLibrary lib = obtain_library(cfg);
  SimSettings st = cfg.sim;
  st.clearance = cfg.clearance;
  const SimLog log = simulate(traj, mode, cfg.robot, lib, st);
  const WindowMetrics m = window_metrics(log, 7.0, cfg.schedule.breakpoints);
  const ModeReport r = summarize(mode.label(), log, m, cfg.schedule.breakpoints);

  Csv csv({"t[s]", "x[m]", "y[m]", "z[m]", "theta[deg]", "Bx[T]", "By[T]", "Bz[T]", "i1[A]",
           "i2[A]", "i3[A]", "i_norm[A]", "clamped[bool]", "synced[bool]"});
  for (const SimStep& s : log.steps)
    csv.row(s.t, s.position.x(), s.position.y(), s.position.z(), rad2deg(s.theta),
            s.B_applied.x(), s.B_applied.y(), s.B_applied.z(), s.i_applied.x(), s.i_applied.y(),
            s.i_applied.z(), s.i_applied.norm(), int(s.clamped), int(s.synced));
  const std::string tag = mode_tag(r.mode);
  emit(out_path(cfg, "simlog_" + tag + ".csv"), csv.str());
  json mj = metrics_json(r, m, traj);
  mj["trajectory"] = trajectory_to_json(traj);
  emit(out_path(cfg, "metrics_" + tag + ".json"), dump(mj));
  std::cout << r.mode << ": P(I_peak>=7A) = " << r.event_fraction
            << ", median E/B^2 = " << r.median_e_over_b2 << (r.completed ? "" : " (incomplete)")
            << "\n";
  return 0;
}

int cmd_compare(const Globals& g, const std::vector<std::string>& files) {
  const ToolConfig cfg = load(g);
  std::vector<json> ms;
  for (const std::string& f : files) ms.push_back(read_json_file(f));
  const std::string ref = ms.front().at("trajectory_fingerprint").get<std::string>();
  for (std::size_t k = 0; k < ms.size(); ++k)
    if (ms[k].at("trajectory_fingerprint").get<std::string>() != ref)
      throw ContractError("compare: " + files[k] + " was produced on a different trajectory");

  Csv csv({"mode[-]", "median_E_over_B2[A^2/T^2]", "P_event[-]", "deep_rate[-]", "mid_rate[-]",
           "shallow_rate[-]", "completed[bool]"});
  json rows = json::array();
  for (const json& m : ms) {
    std::vector<std::string> rates;
    for (const json& r : m.at("regimes")) rates.push_back(fmt(r.at("event_rate"), 12));
    rates.resize(3, "n/a");
    csv.row(m.at("mode").get<std::string>(), fmt(m.at("median_e_over_b2_A2_per_T2"), 12),
            fmt(m.at("event_fraction"), 12), rates[0], rates[1], rates[2],
            int(m.at("completed").get<bool>()));
    rows.push_back({{"mode", m.at("mode")},
                    {"median_e_over_b2_A2_per_T2", m.at("median_e_over_b2_A2_per_T2")},
                    {"event_fraction", m.at("event_fraction")},
                    {"regimes", m.at("regimes")},
                    {"completed", m.at("completed")}});
  }
  emit(out_path(cfg, "compare.csv"), csv.str());
  emit(out_path(cfg, "compare.json"), dump({{"trajectory_fingerprint", ref}, {"modes", rows}}));
  std::cout << compare_table_md(ms);
  return 0;
}

int cmd_report(const Globals& g) {
  const ToolConfig cfg = load(g);
  const fs::path dir = cfg.paths.output_dir;
  if (!fs::is_directory(dir)) throw ConfigError("report: output directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<json> ws, ms;
  std::vector<std::string> profiles, grad_maps, lift_maps;
  for (const fs::path& p : files) {
    const std::string n = p.filename().string();
    if (n.rfind("workspace_", 0) == 0 && p.extension() == ".json") ws.push_back(read_json_file(p.string()));
    if (n.rfind("metrics_", 0) == 0 && p.extension() == ".json") ms.push_back(read_json_file(p.string()));
    if (n.rfind("energy_profile_", 0) == 0) profiles.push_back(n);
    if (n.rfind("gradient_map_", 0) == 0) grad_maps.push_back(n);
    if (n.rfind("lift_map_", 0) == 0) lift_maps.push_back(n);
  }
  std::sort(ws.begin(), ws.end(), [](const json& a, const json& b) {
    return a.at("theta_deg").get<double>() < b.at("theta_deg").get<double>();
  });

  std::ostringstream md;
  md << "# reconfmag summary\n\n## Feasible workspace by inclination\n\n";
  if (ws.empty()) {
    md << "No workspace results found.\n";
  } else {
    md << "| theta [deg] | hull volume [m^3] | feasible nodes | B_req [T] | I_max [A] |\n"
       << "|---|---|---|---|---|\n";
    for (const json& w : ws)
      md << "| " << w.at("theta_deg").get<double>() << " | " << fmt(w.at("hull_volume_m3"), 6)
         << " | " << w.at("feasible_count").get<std::size_t>() << " | " << fmt(w.at("B_req_T"))
         << " | " << fmt(w.at("I_max_A")) << " |\n";
  }
  const auto list = [&md](const char* title, const std::vector<std::string>& names) {
    if (names.empty()) return;
    md << "\n" << title << ":\n";
    for (const std::string& n : names) md << "- " << n << "\n";
  };
  list("Energy depth profiles", profiles);
  list("Gradient disturbance maps", grad_maps);
  list("Lift maps", lift_maps);

  md << "\n## Inclination scheduling\n\n";
  if (ms.empty())
    md << "No simulation metrics found.\n";
  else
    md << compare_table_md(ms);

  json summary = {{"workspace", ws}, {"modes", ms}};
  emit((dir / "report.md").string(), md.str());
  emit((dir / "report.json").string(), dump(summary));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reconfmag: field libraries, workspace analysis and inclination scheduling"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("-c,--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--library", g.library_path, "library file (overrides paths.library)");
  app.add_option("-o,--out", g.out_dir, "output directory (overrides paths.output_dir)");

  auto* build = app.add_subcommand("build-library", "build the field library and write it to disk");

  auto* mech = app.add_subcommand("mechanism", "linkage utilities");
  mech->require_subcommand(1);
  int samples = 101;
  auto* sweep = mech->add_subcommand("sweep", "tabulate s, theta, E and z_limit over the slider range");
  sweep->add_option("--samples", samples, "number of slider positions")->check(CLI::Range(2, 1000000));

  double theta = 45.0, b0 = 1.0;
  std::optional<double> breq, imax;
  auto* ws = app.add_subcommand("workspace", "feasible workspace and hull volume at one inclination");
  ws->add_option("--theta", theta, "inclination [deg]")->required();
  ws->add_option("--breq", breq, "required field [mT]");
  ws->add_option("--imax", imax, "per-coil current limit [A]");

  std::vector<double> elevations{0.0, 22.5, 45.0, 67.5, 90.0};
  int n_alpha = 36;
  auto* gm = app.add_subcommand("gradient-map", "azimuth-averaged gradient disturbance along the axis");
  gm->add_option("--theta", theta, "inclination [deg]")->required();
  gm->add_option("--b0", b0, "field magnitude [mT]");
  gm->add_option("--elevations", elevations, "elevation angles [deg]");
  gm->add_option("--n-alpha", n_alpha, "azimuth samples")->check(CLI::Range(12, 100000));

  std::string axis = "x";
  auto* lm = app.add_subcommand("lift-map", "cycle-averaged lift along the axis");
  lm->add_option("--theta", theta, "inclination [deg]")->required();
  lm->add_option("--b0", b0, "field magnitude [mT]");
  lm->add_option("--axis", axis, "rotation axis")->check(CLI::IsMember({"x", "y", "z"}));

  std::string mode = "auto", traj;
  auto* sim = app.add_subcommand("schedule-sim", "simulate one mode on a trajectory");
  sim->add_option("--mode", mode, "auto or fixed:<deg>");
  sim->add_option("--traj", traj, "trajectory JSON (default: built-in composite path)")
      ->check(CLI::ExistingFile);

  std::vector<std::string> metric_files;
  auto* cmp = app.add_subcommand("compare", "merge metrics files into one table");
  cmp->add_option("metrics", metric_files, "metrics JSON files")->required()->check(CLI::ExistingFile);

  auto* rep = app.add_subcommand("report", "summarize everything in the output directory");

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*build) return cmd_build_library(g);
    if (*sweep) return cmd_mechanism_sweep(g, samples);
    if (*ws) return cmd_workspace(g, theta, breq, imax);
    if (*gm) return cmd_gradient_map(g, theta, b0, elevations, n_alpha);
    if (*lm) return cmd_lift_map(g, theta, b0, axis);
    if (*sim) return cmd_schedule_sim(g, mode, traj);
    if (*cmp) return cmd_compare(g, metric_files);
    if (*rep) return cmd_report(g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 2;
}

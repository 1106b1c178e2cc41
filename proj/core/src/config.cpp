#include "reconfmag/config.hpp"

#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "reconfmag/error.hpp"
#include "reconfmag/fileio.hpp"

namespace reconfmag {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  void num(const std::string& key, double& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    out = v.get<double>();
  }
  void deg(const std::string& key, double& out_rad) {
    double d = rad2deg(out_rad);
    num(key, d);
    out_rad = deg2rad(d);
  }
  void integer(const std::string& key, int& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    out = v.get<int>();
  }
  void str(const std::string& key, std::string& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    out = v.get<std::string>();
  }
  void vec(const std::string& key, std::vector<double>& out, double scale = 1.0) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    out.clear();
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
      out.push_back(e.get<double>() * scale);
    }
  }
  void vec2(const std::string& key, Vec2& out) {
    std::vector<double> v{out.x(), out.y()};
    vec(key, v);
    if (v.size() != 2) throw ConfigError(where(key) + ": expected two numbers");
    out = Vec2(v[0], v[1]);
  }
  Section sub(const std::string& key) {
    take(key);
    return Section(j_.at(key), where(key));
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
  }

 private:
  bool take(const std::string& key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }
  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_strict(const std::string& text) {
  // Stack of key sets, one per open object, to catch duplicate keys that the
  // parser would otherwise silently overwrite.
  std::vector<std::set<std::string>> keys;
  json::parser_callback_t cb = [&keys](int, json::parse_event_t ev, json& parsed) {
    switch (ev) {
      case json::parse_event_t::object_start:
        keys.emplace_back();
        break;
      case json::parse_event_t::object_end:
        keys.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string k = parsed.get<std::string>();
        if (!keys.back().insert(k).second) throw ConfigError("duplicate key '" + k + "'");
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text, cb);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

template <typename F>
void section(Section& root, const char* key, F&& fn) {
  if (!root.has(key)) return;
  Section s = root.sub(key);
  fn(s);
  s.finish();
}

}  // namespace

ToolConfig parse_config(const std::string& text) {
  const json j = parse_strict(text);
  Section root(j, "");
  ToolConfig c;

  int version = kConfigSchemaVersion;
  root.integer("schema_version", version);
  if (version != kConfigSchemaVersion) {
    std::ostringstream os;
    os << "schema_version: unsupported value " << version << " (expected " << kConfigSchemaVersion
       << ")";
    throw ConfigError(os.str());
  }

  section(root, "coil", [&](Section& s) {
    s.num("inner_radius", c.coil.inner_radius);
    s.num("outer_radius", c.coil.outer_radius);
    s.num("axial_length", c.coil.axial_length);
    s.num("turns", c.coil.turns);
    s.num("max_current", c.coil.max_current);
    s.integer("radial_samples", c.coil.radial_samples);
    s.integer("axial_samples", c.coil.axial_samples);
  });
  section(root, "linkage", [&](Section& s) {
    s.vec2("slider_axis", c.linkage.slider_axis);
    s.vec2("point_A", c.linkage.point_A);
    s.vec2("point_D", c.linkage.point_D);
    s.num("len_BC", c.linkage.len_BC);
    s.num("len_CD", c.linkage.len_CD);
    s.num("len_DE", c.linkage.len_DE);
    s.vec2("slider_offset_B", c.linkage.slider_offset_B);
    s.deg("alpha_deg", c.linkage.alpha);
    s.num("s_min", c.linkage.s_min);
    s.num("s_max", c.linkage.s_max);
  });
  section(root, "clearance", [&](Section& s) {
    s.num("z_ref", c.clearance.z_ref);
    s.deg("theta_ref_deg", c.clearance.theta_ref);
    s.num("tip_extent", c.clearance.tip_extent);
  });
  section(root, "mount", [&](Section& s) {
    s.num("pivot_radius", c.mount.pivot_radius);
    s.num("pivot_height", c.mount.pivot_height);
    s.num("axial_offset", c.mount.axial_offset);
  });
  section(root, "library", [&](Section& s) {
    s.vec("theta_deg", c.library.thetas, kPi / 180.0);
    s.num("xy_half", c.library.grid.xy_half);
    s.num("z_min", c.library.grid.z_min);
    s.num("spacing", c.library.grid.spacing);
    s.num("fd_step", c.library.fd_step);
    if (s.has("map")) {
      Section m = s.sub("map");
      m.num("r_max", c.library.map.r_max);
      m.num("z_half", c.library.map.z_half);
      m.num("spacing", c.library.map.spacing);
      m.finish();
    }
  });
  section(root, "feasibility", [&](Section& s) {
    s.num("I_max", c.feasibility.I_max);
    s.num("B_req", c.feasibility.B_req);
    s.integer("sphere_samples", c.feasibility.sphere_samples);
  });
  section(root, "robot", [&](Section& s) {
    s.num("dipole_moment", c.robot.dipole_moment);
    s.num("forward_speed_per_hz", c.robot.forward_speed_per_hz);
    s.num("drag_coefficient", c.robot.drag_coefficient);
    s.num("rotation_freq", c.robot.rotation_freq);
  });
  section(root, "sim", [&](Section& s) {
    s.num("dt", c.sim.dt);
    s.num("B0", c.sim.B0);
    s.num("coil_limit", c.sim.coil_limit);
    s.num("sync_fraction", c.sim.sync_fraction);
    s.num("sink_speed", c.sim.sink_speed);
    s.num("standoff", c.sim.standoff);
    s.num("tube_radius", c.sim.tube_radius);
    s.integer("force_phase_samples", c.sim.force_phase_samples);
    s.num("max_time_factor", c.sim.max_time_factor);
  });
  section(root, "schedule", [&](Section& s) {
    s.vec("breakpoints", c.schedule.breakpoints);
    s.vec("theta_deg", c.schedule.thetas, kPi / 180.0);
    s.num("hysteresis", c.schedule.hysteresis);
  });
  section(root, "paths", [&](Section& s) {
    s.str("library", c.paths.library);
    s.str("output_dir", c.paths.output_dir);
  });
  root.finish();

  c.sim.clearance = c.clearance;
  c.validate();
  return c;
}

ToolConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

void ToolConfig::validate() const {
  coil.validate();
  linkage.validate();
  feasibility.validate();
  robot.validate();
  sim.validate();
  schedule.validate();
  if (!(clearance.tip_extent >= 0.0))
    throw ConfigError("clearance.tip_extent: must be non-negative (z_limit non-increasing)");
  if (!(library.fd_step > 0.0)) throw ConfigError("library.fd_step: must be positive");
  if (!(library.grid.spacing > 0.0 && library.grid.xy_half > 0.0))
    throw ConfigError("library: spacing and xy_half must be positive");
  if (!(library.map.spacing > 0.0 && library.map.r_max > 0.0 && library.map.z_half > 0.0))
    throw ConfigError("library.map: extents and spacing must be positive");
  if (library.thetas.empty()) throw ConfigError("library.theta_deg: must not be empty");

  const auto [tmin, tmax] = theta_bounds(linkage);
  auto check = [&](double th, const char* field) {
    if (th < tmin - 1e-12 || th > tmax + 1e-12) {
      std::ostringstream os;
      os << field << ": theta=" << rad2deg(th) << " deg unreachable; mechanism range ["
         << rad2deg(tmin) << ", " << rad2deg(tmax) << "] deg";
      throw ConfigError(os.str());
    }
  };
  for (double th : library.thetas) check(th, "library.theta_deg");
  for (double th : schedule.thetas) {
    check(th, "schedule.theta_deg");
    bool listed = false;
    for (double lt : library.thetas) listed = listed || std::abs(lt - th) <= 1e-9;
    if (!listed) throw ConfigError("schedule.theta_deg: every scheduled theta must be in library.theta_deg");
  }
  for (double th : library.thetas)
    if (!(z_limit(th, clearance) > library.grid.z_min))
      throw ConfigError("library.z_min: lies above z_limit for some theta");
}

LibraryBuildSpec ToolConfig::library_spec() const {
  LibraryBuildSpec s;
  s.coil = coil;
  s.mount = mount;
  s.clearance = clearance;
  s.thetas = library.thetas;
  s.grid = library.grid;
  s.map = library.map;
  s.fd_step = library.fd_step;
  s.metadata_json = config_to_json(*this, -1);
  return s;
}

std::string config_to_json(const ToolConfig& c, int indent) {
  auto deg_list = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(rad2deg(x));
    return a;
  };
  auto v2 = [](const Vec2& v) { return json::array({v.x(), v.y()}); };
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["coil"] = {{"inner_radius", c.coil.inner_radius},   {"outer_radius", c.coil.outer_radius},
               {"axial_length", c.coil.axial_length},   {"turns", c.coil.turns},
               {"max_current", c.coil.max_current},     {"radial_samples", c.coil.radial_samples},
               {"axial_samples", c.coil.axial_samples}};
  j["linkage"] = {{"slider_axis", v2(c.linkage.slider_axis)},
                  {"point_A", v2(c.linkage.point_A)},
                  {"point_D", v2(c.linkage.point_D)},
                  {"len_BC", c.linkage.len_BC},
                  {"len_CD", c.linkage.len_CD},
                  {"len_DE", c.linkage.len_DE},
                  {"slider_offset_B", v2(c.linkage.slider_offset_B)},
                  {"alpha_deg", rad2deg(c.linkage.alpha)},
                  {"s_min", c.linkage.s_min},
                  {"s_max", c.linkage.s_max}};
  j["clearance"] = {{"z_ref", c.clearance.z_ref},
                    {"theta_ref_deg", rad2deg(c.clearance.theta_ref)},
                    {"tip_extent", c.clearance.tip_extent}};
  j["mount"] = {{"pivot_radius", c.mount.pivot_radius},
                {"pivot_height", c.mount.pivot_height},
                {"axial_offset", c.mount.axial_offset}};
  j["library"] = {{"theta_deg", deg_list(c.library.thetas)},
                  {"xy_half", c.library.grid.xy_half},
                  {"z_min", c.library.grid.z_min},
                  {"spacing", c.library.grid.spacing},
                  {"fd_step", c.library.fd_step},
                  {"map",
                   {{"r_max", c.library.map.r_max},
                    {"z_half", c.library.map.z_half},
                    {"spacing", c.library.map.spacing}}}};
  j["feasibility"] = {{"I_max", c.feasibility.I_max},
                      {"B_req", c.feasibility.B_req},
                      {"sphere_samples", c.feasibility.sphere_samples}};
  j["robot"] = {{"dipole_moment", c.robot.dipole_moment},
                {"forward_speed_per_hz", c.robot.forward_speed_per_hz},
                {"drag_coefficient", c.robot.drag_coefficient},
                {"rotation_freq", c.robot.rotation_freq}};
  j["sim"] = {{"dt", c.sim.dt},
              {"B0", c.sim.B0},
              {"coil_limit", c.sim.coil_limit},
              {"sync_fraction", c.sim.sync_fraction},
              {"sink_speed", c.sim.sink_speed},
              {"standoff", c.sim.standoff},
              {"tube_radius", c.sim.tube_radius},
              {"force_phase_samples", c.sim.force_phase_samples},
              {"max_time_factor", c.sim.max_time_factor}};
  j["schedule"] = {{"breakpoints", c.schedule.breakpoints},
                   {"theta_deg", deg_list(c.schedule.thetas)},
                   {"hysteresis", c.schedule.hysteresis}};
  j["paths"] = {{"library", c.paths.library}, {"output_dir", c.paths.output_dir}};
  return j.dump(indent);
}

}  // namespace reconfmag

#pragma once

#include <string>
#include <vector>

#include "reconfmag/coil_field.hpp"
#include "reconfmag/library.hpp"
#include "reconfmag/mechanism.hpp"
#include "reconfmag/schedule.hpp"
#include "reconfmag/workspace.hpp"

namespace reconfmag {

inline constexpr int kConfigSchemaVersion = 1;

// Everything a pipeline run needs. Angles are radians here; the JSON file
// uses degrees for every field whose name ends in _deg.
struct ToolConfig {
  CoilSpec coil;
  LinkageGeometry linkage;
  ClearanceModel clearance;
  MountModel mount;

  struct Library {
    std::vector<double> thetas{deg2rad(35.0), deg2rad(45.0), deg2rad(55.0)};
    LibraryGrid grid;
    MapGridSpec map;
    double fd_step = 0.0025;
  } library;

  FeasibilitySpec feasibility;
  RobotParams robot;
  SimSettings sim;
  ThetaSchedule schedule;

  struct Paths {
    std::string library = "field_library.rml";
    std::string output_dir = "out";
  } paths;

  // Field checks plus reachability of every theta by the linkage.
  void validate() const;
  LibraryBuildSpec library_spec() const;
};

// Parses JSON text. Unknown keys, duplicate keys and out-of-range values are
// rejected with a ConfigError naming the offending field.
ToolConfig parse_config(const std::string& text);
ToolConfig load_config(const std::string& path);

// Canonical JSON (sorted keys, all defaults filled in).
std::string config_to_json(const ToolConfig& cfg, int indent = 2);

}  // namespace reconfmag

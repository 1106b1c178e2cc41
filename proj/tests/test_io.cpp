#include <filesystem>
#include <cstring>

#include "doctest.h"
#include "reconfmag/config.hpp"
#include "reconfmag/error.hpp"
#include "reconfmag/fileio.hpp"
#include "reconfmag/library_io.hpp"
#include "test_support.hpp"

using namespace reconfmag;
namespace fs = std::filesystem;

namespace {

FieldLibrary small_library() {
  ToolConfig cfg;
  cfg.library.grid.xy_half = 0.005;
  cfg.library.grid.z_min = -0.215;
  LibraryBuildSpec spec = cfg.library_spec();
  return build_library(spec, testsupport::default_map());
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "reconfmag_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const ToolConfig c = parse_config(R"({"library": {"theta_deg": [35, 45, 55]}})");
  CHECK(c.library.thetas.size() == 3);
  CHECK(rad2deg(c.library.thetas[2]) == doctest::Approx(55.0));
  CHECK(c.coil.turns == CoilSpec{}.turns);
  CHECK(c.feasibility.I_max == 5.0);
  CHECK(c.library.fd_step == 0.0025);
}

TEST_CASE("config rejects bad input with the field name") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"coil": {"turns": 10, "turns": 20}})"),
                       doctest::Contains("duplicate key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"coil": {"windings": 10}})"),
                       doctest::Contains("coil.windings"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"feasibility": {"I_max": "five"}})"),
                       doctest::Contains("feasibility.I_max"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"library": {"theta_deg": [35, 80]}})"),
                       doctest::Contains("mechanism range"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"schema_version": 7})"),
                       doctest::Contains("schema_version"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schedule": {"theta_deg": [35, 45, 50]}})"), ConfigError);
}

TEST_CASE("config canonical form round-trips") {
  ToolConfig c;
  c.sim.standoff = 0.004;
  c.paths.library = "x.rml";
  const std::string a = config_to_json(c);
  const ToolConfig back = parse_config(a);
  CHECK(config_to_json(back) == a);
  const fs::path p = scratch("cfg.json");
  write_file_atomic(p.string(), a);
  CHECK(config_to_json(load_config(p.string())) == a);
}

TEST_CASE("library round trip is bit exact") {
  const FieldLibrary lib = small_library();
  const fs::path p = scratch("lib.rml");
  write_library(lib, p.string());
  const FieldLibrary back = read_library(p.string());
  REQUIRE(back.payload().size() == lib.payload().size());
  CHECK(std::memcmp(back.payload().data(), lib.payload().data(),
                    lib.payload().size() * sizeof(double)) == 0);
  CHECK(back.metadata() == lib.metadata());
  CHECK(encode_library(back) == encode_library(lib));
  CHECK(library_content_hash(back) == library_content_hash(lib));
}

TEST_CASE("rebuilding gives the same content hash") {
  CHECK(library_content_hash(small_library()) == library_content_hash(small_library()));
}

TEST_CASE("library corruption is detected with distinct errors") {
  const std::string bytes = encode_library(small_library());

  std::string flipped = bytes;
  flipped[flipped.size() - 5] ^= 0x01;
  CHECK_THROWS_AS(decode_library(flipped), HashMismatchError);

  CHECK_THROWS_AS(decode_library(bytes.substr(0, bytes.size() - 8)), TruncatedFileError);
  CHECK_THROWS_AS(decode_library(bytes.substr(0, 40)), TruncatedFileError);
  CHECK_THROWS_AS(decode_library(bytes.substr(0, 10)), TruncatedFileError);

  std::string older = bytes;
  const auto at = older.find("\"format_version\":1");
  REQUIRE(at != std::string::npos);
  older[at + 17] = '0';
  CHECK_THROWS_WITH_AS(decode_library(older), doctest::Contains("version 0"), VersionMismatchError);

  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_library(magic), LibraryFormatError);
}

TEST_CASE("atomic writes leave no temporary files behind") {
  const fs::path dir = scratch("atomic");
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string path = (dir / "out.txt").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.is_regular_file() ? 1 : 0;
  CHECK(n == 1);
  CHECK_THROWS(read_file((dir / "missing").string()));
}

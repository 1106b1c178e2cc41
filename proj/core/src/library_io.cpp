#include "reconfmag/library_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "json.hpp"
#include "reconfmag/digest.hpp"
#include "reconfmag/error.hpp"
#include "reconfmag/fileio.hpp"

namespace reconfmag {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'R', 'M', 'F', 'L', 'I', 'B', '\0', '\n'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return v;
}

std::string payload_bytes(const std::vector<double>& values) {
  std::string out;
  out.reserve(values.size() * 8);
  for (double d : values) put_u64(out, std::bit_cast<std::uint64_t>(d));
  return out;
}

}  // namespace

std::string library_content_hash(const FieldLibrary& lib) {
  const std::string p = payload_bytes(lib.payload());
  return sha256_hex(p.data(), p.size());
}

std::string encode_library(const FieldLibrary& lib) {
  const std::string payload = payload_bytes(lib.payload());
  json header;
  header["format"] = "reconfmag-field-library";
  header["format_version"] = kLibraryFormatVersion;
  header["endianness"] = "little";
  header["units"] = {{"position", "m"}, {"A", "T/A"}, {"G", "T/(A*m)"}, {"theta", "rad"}};
  header["node_layout"] =
      "x,y,z, A[m][k] column-major (column k = coil k), G[k][m][n] = d(a_k)_m/dx_n";
  header["doubles_per_node"] = kNodeDoubles;
  header["fd_step"] = lib.fd_step();
  json grids = json::array();
  for (const ThetaGrid& g : lib.grids())
    grids.push_back({{"theta", g.theta},
                     {"theta_deg", rad2deg(g.theta)},
                     {"origin", {g.origin.x(), g.origin.y(), g.origin.z()}},
                     {"spacing", g.spacing},
                     {"shape", {g.nx, g.ny, g.nz}}});
  header["grids"] = grids;
  header["payload_bytes"] = payload.size();
  header["payload_sha256"] = sha256_hex(payload.data(), payload.size());
  try {
    header["config"] = json::parse(lib.metadata());
  } catch (const json::parse_error&) {
    header["config"] = lib.metadata();
  }
  const std::string htext = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put_u64(out, htext.size());
  out += htext;
  out += payload;
  return out;
}

FieldLibrary decode_library(const std::string& bytes) {
  if (bytes.size() < 16) throw TruncatedFileError("library file truncated: missing preamble");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw LibraryFormatError("not a field library file (bad magic)");
  const std::uint64_t hlen = get_u64(bytes.data() + 8);
  if (hlen > bytes.size() - 16) throw TruncatedFileError("library file truncated inside header");
  json header;
  try {
    header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(hlen));
  } catch (const json::parse_error& e) {
    throw LibraryFormatError(std::string("corrupt library header: ") + e.what());
  }
  try {
    if (!header.contains("format_version"))
      throw VersionMismatchError("library header has no format_version");
    const int version = header.at("format_version").get<int>();
    if (version != kLibraryFormatVersion) {
      std::ostringstream os;
      os << "library format version " << version << " not supported (expected "
         << kLibraryFormatVersion << ")";
      throw VersionMismatchError(os.str());
    }
    const std::uint64_t plen = header.at("payload_bytes").get<std::uint64_t>();
    const std::size_t start = 16 + static_cast<std::size_t>(hlen);
    if (bytes.size() - start < plen) throw TruncatedFileError("library file truncated inside payload");
    if (bytes.size() - start > plen) throw LibraryFormatError("trailing bytes after library payload");
    const std::string digest = sha256_hex(bytes.data() + start, plen);
    if (digest != header.at("payload_sha256").get<std::string>())
      throw HashMismatchError("library payload hash mismatch (file corrupted)");
    if (plen % 8 != 0) throw LibraryFormatError("payload length is not a multiple of 8");

    std::vector<double> payload(plen / 8);
    for (std::size_t i = 0; i < payload.size(); ++i)
      payload[i] = std::bit_cast<double>(get_u64(bytes.data() + start + 8 * i));

    std::vector<ThetaGrid> grids;
    for (const json& g : header.at("grids")) {
      ThetaGrid t;
      t.theta = g.at("theta").get<double>();
      const auto& o = g.at("origin");
      t.origin = Vec3(o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>());
      t.spacing = g.at("spacing").get<double>();
      const auto& s = g.at("shape");
      t.nx = s.at(0).get<std::size_t>();
      t.ny = s.at(1).get<std::size_t>();
      t.nz = s.at(2).get<std::size_t>();
      grids.push_back(t);
    }
    const json& cfg = header.at("config");
    std::string meta = cfg.is_string() ? cfg.get<std::string>() : cfg.dump();
    return FieldLibrary(std::move(meta), header.at("fd_step").get<double>(), std::move(grids),
                        std::move(payload));
  } catch (const json::exception& e) {
    throw LibraryFormatError(std::string("malformed library header: ") + e.what());
  } catch (const ContractError& e) {
    throw LibraryFormatError(std::string("inconsistent library header: ") + e.what());
  }
}

void write_library(const FieldLibrary& lib, const std::string& path) {
  write_file_atomic(path, encode_library(lib));
}

FieldLibrary read_library(const std::string& path) { return decode_library(read_file(path)); }

}  // namespace reconfmag

#pragma once

#include <string>
#include <string_view>

namespace reconfmag {

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partial file.
void write_file_atomic(const std::string& path, std::string_view contents);

std::string read_file(const std::string& path);

}  // namespace reconfmag

#pragma once

#include <string>

#include "reconfmag/library.hpp"

namespace reconfmag {

inline constexpr int kLibraryFormatVersion = 1;

// File layout: 8-byte magic "RMFLIB\0\n", uint64 little-endian header length,
// UTF-8 JSON header, then the payload as little-endian IEEE-754 doubles in
// node-major order (x fastest, then y, z, then theta block).
std::string encode_library(const FieldLibrary& lib);
FieldLibrary decode_library(const std::string& bytes);

void write_library(const FieldLibrary& lib, const std::string& path);
FieldLibrary read_library(const std::string& path);

// SHA-256 of the encoded payload (the value stored in the header).
std::string library_content_hash(const FieldLibrary& lib);

}  // namespace reconfmag

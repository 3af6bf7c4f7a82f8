#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace biomlab {

// SHA-256 (FIPS 180-4) over in-memory bytes or a file; returns lowercase hex.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::string& path);

}  // namespace biomlab

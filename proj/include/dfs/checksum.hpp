#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dfs {

// Lowercase hex SHA-256 digest of the given bytes.
std::string sha256_hex(std::string_view bytes);

// "sha256:" + hex digest of the raw bytes.
std::string compute_file_checksum(std::string_view bytes);

// Streaming variant for on-disk files. Throws IoError.
std::string compute_file_checksum(const std::filesystem::path& file);

}  // namespace dfs

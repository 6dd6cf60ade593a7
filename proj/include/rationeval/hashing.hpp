#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace rationeval {

// Lowercase hex SHA-256 digest of the bytes.
std::string sha256_hex(std::string_view bytes);

std::string sha256_file(const std::filesystem::path& path);

// Digest over a directory: each file's relative path and content hash, sorted
// by path, hashed together. Two trees compare equal iff their digests match.
std::string sha256_tree(const std::filesystem::path& root);

}  // namespace rationeval

#pragma once

#include <filesystem>
#include <string>

#include "rationeval/core.hpp"

namespace rationeval::toml {

// Minimal TOML reader covering what run configs need: comments, [table] and
// [a.b] headers, bare or quoted keys, strings, integers, floats, booleans and
// single-line arrays. Anything else is a ConfigError with a line number.
ojson parse(const std::string& text);
ojson parse_file(const std::filesystem::path& path);

}  // namespace rationeval::toml

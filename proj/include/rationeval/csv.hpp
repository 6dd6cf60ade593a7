#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rationeval::csv {

// Shortest decimal form that parses back to the same double (to_chars).
// Serialized artifacts must round-trip bit-exactly.
std::string format_double(double value);
double parse_double(const std::string& text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws on unknown name
};

// RFC 4180: fields holding comma, quote or newline are quoted, quotes doubled.
std::string to_string(const Table& table);
Table from_string(const std::string& text);

void write(const std::filesystem::path& path, const Table& table);
Table read(const std::filesystem::path& path);

}  // namespace rationeval::csv

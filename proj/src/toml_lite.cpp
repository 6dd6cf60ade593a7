#include "rationeval/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "rationeval/errors.hpp"

namespace rationeval::toml {

namespace {

struct Line {
  std::string text;
  int number = 0;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("config line " + std::to_string(number) + ": " + why);
  }

  void skip_space() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  bool at_end() {
    skip_space();
    return pos >= text.size() || text[pos] == '#';
  }

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }
};

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_basic_string(Line& line) {
  if (line.peek() != '"') line.fail("expected '\"'");
  ++line.pos;
  std::string out;
  while (true) {
    if (line.pos >= line.text.size()) line.fail("unterminated string");
    char c = line.text[line.pos++];
    if (c == '"') return out;
    if (c == '\\') {
      if (line.pos >= line.text.size()) line.fail("dangling escape");
      char e = line.text[line.pos++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: line.fail(std::string("unsupported escape \\") + e);
      }
    } else {
      out += c;
    }
  }
}

std::string parse_key(Line& line) {
  line.skip_space();
  if (line.peek() == '"') return parse_basic_string(line);
  std::string key;
  while (line.pos < line.text.size() && is_bare_key_char(line.text[line.pos])) {
    key += line.text[line.pos++];
  }
  if (key.empty()) line.fail("expected a key");
  return key;
}

ojson parse_scalar(Line& line) {
  line.skip_space();
  char c = line.peek();
  if (c == '"') return parse_basic_string(line);
  std::string token;
  while (line.pos < line.text.size()) {
    char t = line.text[line.pos];
    if (t == ',' || t == ']' || t == '#' || t == ' ' || t == '\t') break;
    token += t;
    ++line.pos;
  }
  if (token.empty()) line.fail("expected a value");
  if (token == "true") return true;
  if (token == "false") return false;
  bool looks_float = token.find_first_of(".eE") != std::string::npos;
  try {
    std::size_t used = 0;
    if (looks_float) {
      double v = std::stod(token, &used);
      if (used != token.size()) line.fail("bad float: " + token);
      return v;
    }
    long long v = std::stoll(token, &used);
    if (used != token.size()) line.fail("bad integer: " + token);
    return v;
  } catch (const std::exception&) {
    line.fail("bad value: " + token);
  }
}

ojson parse_value(Line& line) {
  line.skip_space();
  if (line.peek() != '[') return parse_scalar(line);
  ++line.pos;
  ojson array = ojson::array();
  line.skip_space();
  if (line.peek() == ']') {
    ++line.pos;
    return array;
  }
  while (true) {
    array.push_back(parse_scalar(line));
    line.skip_space();
    if (line.peek() == ',') {
      ++line.pos;
      line.skip_space();
      if (line.peek() == ']') {
        ++line.pos;
        return array;
      }
      continue;
    }
    if (line.peek() == ']') {
      ++line.pos;
      return array;
    }
    line.fail("expected ',' or ']' in array");
  }
}

// Walk or create nested tables along a dotted path.
ojson* descend(ojson& root, const std::vector<std::string>& path, const Line& line) {
  ojson* node = &root;
  for (const std::string& part : path) {
    ojson& next = (*node)[part];
    if (next.is_null()) next = ojson::object();
    if (!next.is_object()) line.fail("key " + part + " is not a table");
    node = &next;
  }
  return node;
}

}  // namespace

ojson parse(const std::string& text) {
  ojson root = ojson::object();
  ojson* current = &root;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    Line line{raw, number, 0};
    if (line.at_end()) continue;
    if (line.peek() == '[') {
      ++line.pos;
      std::vector<std::string> path;
      while (true) {
        path.push_back(parse_key(line));
        line.skip_space();
        if (line.peek() == '.') {
          ++line.pos;
          continue;
        }
        break;
      }
      if (line.peek() != ']') line.fail("expected ']'");
      ++line.pos;
      if (!line.at_end()) line.fail("trailing characters after table header");
      current = descend(root, path, line);
      continue;
    }
    std::string key = parse_key(line);
    line.skip_space();
    if (line.peek() != '=') line.fail("expected '=' after key " + key);
    ++line.pos;
    ojson value = parse_value(line);
    if (!line.at_end()) line.fail("trailing characters after value for " + key);
    if (current->contains(key)) line.fail("duplicate key " + key);
    (*current)[key] = std::move(value);
  }
  return root;
}

ojson parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace rationeval::toml

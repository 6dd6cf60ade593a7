#include "rationeval/judge.hpp"

#include <cctype>
#include <map>
#include <sstream>

#include "rationeval/core.hpp"
#include "rationeval/errors.hpp"

namespace rationeval::judge {

namespace {

std::string attribute_listing() {
  std::string out;
  for (Attribute a : all_attributes()) {
    std::string name(attribute_name(a));
    if (a == Attribute::kCompleteness) name = "Coverage/Completeness";
    out += name + ":\n" + std::string(attribute_definition(a)) + "\n\n";
  }
  return out;
}

std::string scale_one_body() {
  return
      "You are an expert evaluator for mathematical and logical explanations.\n"
      "Given the following question and rationale, please assign a score between 0 (worst) and 1\n"
      "(best) for each attribute listed below. For each attribute, also provide a brief justification.\n"
      "\n"
      "IMPORTANT: A score of **1.0 always means BEST** and **0.0 always means WORST**, even for\n"
      "attributes like Hallucination and Repetition. Interpret all attributes as \"more of a good thing.\"\n"
      "\n"
      "Please return your response in two Python dictionaries:\n"
      "\n"
      "- One called `scores` where each key is the name of the attribute and the value is the score\n"
      "(a float between 0 and 1).\n"
      "\n"
      "- One called `explanations` where each key is the name of the attribute and the value is your\n"
      "explanation (1-2 sentences) for that score.\n"
      "\n"
      "Please output the Python dictionaries as plain text only - do not include code blocks,\n"
      "markdown, or any extra formatting.\n"
      "\n"
      "Here are the attributes and their definitions:\n"
      "\n" +
      attribute_listing() +
      "Example output format:\n"
      "\n"
      "scores = {\n"
      "    \"Faithfulness\": 0.95,\n"
      "    \"Hallucination\": 0.67,\n"
      "    \"Repetition\": 0.89,\n"
      "    ...\n"
      "}\n"
      "\n"
      "explanations = {\n"
      "    \"Faithfulness\": \"The rationale closely follows logical steps derived from the question.\",\n"
      "    \"Hallucination\": \"Some external information or assumptions were introduced. For example, ...\",\n"
      "    \"Repetition\": \"The rationale is does not repeat it self with similar points at different steps.\",\n"
      "    ...\n"
      "}\n"
      "\n"
      "Math/Logic Question:\n"
      "{question}\n"
      "\n"
      "Rationale:\n"
      "{rationale}\n";
}

std::string scale_ten_body() {
  return
      "You are an expert evaluator for mathematical and logical explanations.\n"
      "\n"
      "Given the following question and rationale, please assign a score between 0 (worst)\n"
      "and 10 (best) for each attribute listed below. For each attribute, also provide a\n"
      "brief justification.\n"
      "\n"
      "IMPORTANT: A score of **10 always means BEST** and **0 always means WORST**,\n"
      "even for attributes like Hallucination and Repetition.\n"
      "Interpret all attributes as \"more of a good thing.\"\n"
      "\n"
      "Please return your response in two Python dictionaries:\n"
      "\n"
      "- One called `scores` where each key is the name of the attribute and the value is the\n"
      "score (a float between 0 and 10).\n"
      "\n"
      "- One called `explanations` where each key is the name of the attribute and the value\n"
      "is your explanation (1-2 sentences) for that score.\n"
      "\n"
      "Please output the Python dictionaries as plain text only, do not include code blocks,\n"
      "markdown, or any extra formatting.\n"
      "\n"
      "Here are the attributes and their definitions:\n"
      "\n" +
      attribute_listing() +
      "Example output format:\n"
      "\n"
      "scores = {\n"
      "    \"Faithfulness\": 9.5,\n"
      "    \"Hallucination\": 6.8,\n"
      "    \"Repetition\": 8.9,\n"
      "    ...\n"
      "}\n"
      "\n"
      "explanations = {\n"
      "    \"Faithfulness\": \"The rationale closely follows logical steps derived from the question.\",\n"
      "    \"Hallucination\": \"Some external information or assumptions were introduced. For example, ...\",\n"
      "    \"Repetition\": \"The rationale is does not repeat it self with similar points at different steps.\",\n"
      "    ...\n"
      "}\n"
      "\n"
      "Math/Logic Question:\n"
      "{question}\n"
      "\n"
      "Rationale:\n"
      "{rationale}\n";
}

void validate_template(const PromptTemplate& t) {
  for (const char* ph : {"{question}", "{rationale}"}) {
    size_t first = t.body.find(ph);
    if (first == std::string::npos) {
      throw DataError("template " + t.template_id + " missing placeholder " + ph);
    }
    if (t.body.find(ph, first + 1) != std::string::npos) {
      throw DataError("template " + t.template_id + " repeats placeholder " + ph);
    }
  }
}

}  // namespace

const PromptTemplate& scale_one_template() {
  static const PromptTemplate t = [] {
    PromptTemplate tmpl{"attributes-scale-1", scale_one_body(), 1.0};
    validate_template(tmpl);
    return tmpl;
  }();
  return t;
}

const PromptTemplate& scale_ten_template() {
  static const PromptTemplate t = [] {
    PromptTemplate tmpl{"attributes-scale-10", scale_ten_body(), 10.0};
    validate_template(tmpl);
    return tmpl;
  }();
  return t;
}

const PromptTemplate& template_for_scale(double native_scale_max) {
  if (native_scale_max == 1.0) return scale_one_template();
  if (native_scale_max == 10.0) return scale_ten_template();
  throw ConfigError("no template for scale max " + std::to_string(native_scale_max));
}

std::string render_prompt(const PromptTemplate& tmpl, const std::string& question,
                          const std::string& rationale) {
  validate_template(tmpl);
  std::string out;
  out.reserve(tmpl.body.size() + question.size() + rationale.size());
  const std::string& body = tmpl.body;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t brace = body.find('{', pos);
    if (brace == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    out.append(body, pos, brace - pos);
    if (body.compare(brace, 10, "{question}") == 0) {
      out += question;
      pos = brace + 10;
    } else if (body.compare(brace, 11, "{rationale}") == 0) {
      out += rationale;
      pos = brace + 11;
    } else {
      out += '{';
      pos = brace + 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verdict parsing. A deliberately small grammar: two assignments of the form
//   <name> = { "key": value, ... }
// where values are numeric literals (scores) or double-quoted strings
// (explanations). Model output is data; nothing here evaluates it.

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    size_t from = pos > 30 ? pos - 30 : 0;
    std::string ctx = text.substr(from, 60);
    throw DataError("verdict parse error: " + msg + " near \"" + ctx + "\"");
  }
};

std::string parse_quoted_string(Cursor& c) {
  if (c.eof() || c.peek() != '"') c.fail("expected '\"'");
  ++c.pos;
  std::string out;
  while (!c.eof()) {
    char ch = c.text[c.pos++];
    if (ch == '"') return out;
    if (ch == '\\') {
      if (c.eof()) c.fail("dangling escape");
      char esc = c.text[c.pos++];
      switch (esc) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case '/': out += '/'; break;
        default:
          out += '\\';
          out += esc;
      }
    } else {
      out += ch;
    }
  }
  c.fail("unterminated string");
}

double parse_number(Cursor& c) {
  size_t start = c.pos;
  if (!c.eof() && (c.peek() == '+' || c.peek() == '-')) ++c.pos;
  bool digits = false;
  while (!c.eof() && (std::isdigit(static_cast<unsigned char>(c.peek())) || c.peek() == '.')) {
    if (std::isdigit(static_cast<unsigned char>(c.peek()))) digits = true;
    ++c.pos;
  }
  if (!c.eof() && (c.peek() == 'e' || c.peek() == 'E')) {
    ++c.pos;
    if (!c.eof() && (c.peek() == '+' || c.peek() == '-')) ++c.pos;
    while (!c.eof() && std::isdigit(static_cast<unsigned char>(c.peek()))) ++c.pos;
  }
  if (!digits) c.fail("expected a numeric score");
  try {
    return std::stod(c.text.substr(start, c.pos - start));
  } catch (const std::exception&) {
    c.fail("invalid numeric literal");
  }
}

enum class ValueKind { kNumber, kString };

// Parses { "key": value, ... } with optional trailing comma. Ellipsis
// placeholders are rejected: they mark a truncated response.
std::map<std::string, std::pair<ValueKind, std::string>> parse_dict(Cursor& c,
                                                                    const char* block_name) {
  c.skip_ws();
  if (c.eof() || c.peek() != '{') c.fail(std::string(block_name) + " block must open with '{'");
  ++c.pos;
  std::map<std::string, std::pair<ValueKind, std::string>> entries;
  while (true) {
    c.skip_ws();
    if (c.eof()) c.fail(std::string(block_name) + " block is unterminated");
    if (c.peek() == '}') {
      ++c.pos;
      return entries;
    }
    if (c.text.compare(c.pos, 3, "...") == 0) {
      c.fail(std::string(block_name) + " contains an ellipsis placeholder");
    }
    std::string key = parse_quoted_string(c);
    c.skip_ws();
    if (c.eof() || c.peek() != ':') c.fail("expected ':' after key \"" + key + "\"");
    ++c.pos;
    c.skip_ws();
    if (c.eof()) c.fail("missing value for key \"" + key + "\"");
    std::pair<ValueKind, std::string> value;
    if (c.peek() == '"') {
      value = {ValueKind::kString, parse_quoted_string(c)};
    } else {
      size_t start = c.pos;
      parse_number(c);
      value = {ValueKind::kNumber, c.text.substr(start, c.pos - start)};
    }
    if (entries.count(key)) c.fail("duplicate key \"" + key + "\"");
    entries.emplace(std::move(key), std::move(value));
    c.skip_ws();
    if (c.eof()) c.fail(std::string(block_name) + " block is unterminated");
    if (c.peek() == ',') {
      ++c.pos;
      continue;
    }
    if (c.peek() != '}') c.fail("expected ',' or '}' in " + std::string(block_name));
  }
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Finds `<name> = {` and parses the dict; tries every occurrence of the
// name and keeps the first that parses. Keeps the last error otherwise.
std::map<std::string, std::pair<ValueKind, std::string>> find_block(const std::string& text,
                                                                    const std::string& name) {
  size_t search = 0;
  std::string last_error = "no `" + name + "` assignment found";
  bool found_any = false;
  while (true) {
    size_t at = text.find(name, search);
    if (at == std::string::npos) break;
    search = at + 1;
    if (at > 0 && is_ident_char(text[at - 1])) continue;
    size_t after = at + name.size();
    if (after < text.size() && is_ident_char(text[after])) continue;
    Cursor c{text, after};
    c.skip_ws();
    if (c.eof() || c.peek() != '=') continue;
    ++c.pos;
    found_any = true;
    try {
      return parse_dict(c, name.c_str());
    } catch (const DataError& e) {
      last_error = e.what();
    }
  }
  if (!found_any) {
    throw DataError("verdict parse error: no `" + name + "` block in response: \"" +
                    text.substr(0, 80) + (text.size() > 80 ? "...\"" : "\""));
  }
  throw DataError(last_error);
}

// Strips a leading and a trailing fence line (``` or ```lang).
std::string strip_fences(const std::string& raw) {
  size_t begin = raw.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return raw;
  size_t end = raw.find_last_not_of(" \t\r\n") + 1;
  std::string body = raw.substr(begin, end - begin);
  if (body.compare(0, 3, "```") != 0) return body;
  size_t nl = body.find('\n');
  if (nl == std::string::npos) return body;
  std::string inner = body.substr(nl + 1);
  size_t closing = inner.rfind("```");
  if (closing == std::string::npos) return body;
  return inner.substr(0, closing);
}

}  // namespace

JudgeVerdict parse_verdict(const std::string& raw, const JudgeConfig& config) {
  const std::string text = strip_fences(raw);

  auto score_entries = find_block(text, "scores");
  auto explanation_entries = find_block(text, "explanations");

  JudgeVerdict verdict;
  verdict.judge_id = config.judge_id;
  verdict.native_scale_max = config.native_scale_max;
  verdict.raw_response = raw;

  for (const auto& [key, value] : score_entries) {
    auto attr = parse_attribute(key);
    if (!attr) continue;  // stray keys are dropped, never fabricated
    if (value.first != ValueKind::kNumber) {
      throw DataError("judge " + config.judge_id + ": score for " + key + " is not numeric");
    }
    double raw_score = std::stod(value.second);
    if (!(raw_score >= 0.0 && raw_score <= config.native_scale_max)) {
      throw DataError("judge " + config.judge_id + ": score " + value.second + " for " + key +
                      " outside [0, " + std::to_string(config.native_scale_max) + "]");
    }
    verdict.card.set(*attr, normalize_scale(raw_score, config.native_scale_max));
  }
  if (!verdict.card.complete()) {
    std::string gaps;
    for (Attribute a : verdict.card.missing()) {
      if (!gaps.empty()) gaps += ", ";
      gaps += attribute_name(a);
    }
    throw DataError("judge " + config.judge_id + ": incomplete verdict, missing: " + gaps);
  }

  for (const auto& [key, value] : explanation_entries) {
    auto attr = parse_attribute(key);
    if (!attr) continue;
    if (value.first != ValueKind::kString) {
      throw DataError("judge " + config.judge_id + ": explanation for " + key +
                      " is not a string");
    }
    verdict.explanations[*attr] = value.second;
  }
  return verdict;
}

}  // namespace rationeval::judge

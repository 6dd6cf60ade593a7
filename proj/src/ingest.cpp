#include "rationeval/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rationeval/errors.hpp"

namespace rationeval::ingest {

namespace {

std::string snippet(const std::string& line) {
  constexpr size_t kMax = 80;
  if (line.size() <= kMax) return line;
  return line.substr(0, kMax) + "...";
}

std::vector<Turn> parse_conversation(const ojson& j, const char* field, size_t line_no) {
  if (!j.is_array() || j.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": " + field +
                    " must be a non-empty array");
  }
  std::vector<Turn> turns;
  for (const auto& t : j) {
    if (!t.is_object() || !t.contains("role") || !t.contains("content")) {
      throw DataError("line " + std::to_string(line_no) + ": " + field +
                      " turns need role and content");
    }
    Turn turn;
    turn.role = t.at("role").get<std::string>();
    // Some releases carry null content for refused answers.
    turn.content = t.at("content").is_null() ? "" : t.at("content").get<std::string>();
    turns.push_back(std::move(turn));
  }
  // Role-alternating, starting with a user turn.
  for (size_t i = 0; i < turns.size(); ++i) {
    const std::string expected = (i % 2 == 0) ? "user" : "assistant";
    if (turns[i].role != expected) {
      throw DataError("line " + std::to_string(line_no) + ": " + field + " turn " +
                      std::to_string(i) + " has role \"" + turns[i].role + "\", expected " +
                      expected);
    }
  }
  return turns;
}

std::string join_turns(const std::vector<Turn>& turns, const std::string& role) {
  std::string out;
  bool first = true;
  for (const Turn& t : turns) {
    if (t.role != role) continue;
    if (!first) out += "\n\n";
    out += t.content;
    first = false;
  }
  return out;
}

}  // namespace

Format format_from_string(const std::string& s) {
  if (s == "arena_jsonl") return Format::kArenaJsonl;
  if (s == "mtbench_jsonl") return Format::kMtbenchJsonl;
  throw ConfigError("unknown dataset format: \"" + s + "\"");
}

RawConversationPair parse_raw_record(const std::string& line, Format format, size_t line_no) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const ojson::exception& e) {
    throw DataError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() +
                    ") in: " + snippet(line));
  }
  for (const char* field :
       {"question_id", "model_a", "model_b", "winner", "conversation_a", "conversation_b"}) {
    if (!j.contains(field)) {
      throw DataError("line " + std::to_string(line_no) + ": missing field \"" + field +
                      "\" in: " + snippet(line));
    }
  }

  RawConversationPair raw;
  if (j.at("question_id").is_number_integer()) {
    raw.question_id = std::to_string(j.at("question_id").get<long long>());
  } else {
    raw.question_id = j.at("question_id").get<std::string>();
  }
  raw.model_a = j.at("model_a").get<std::string>();
  raw.model_b = j.at("model_b").get<std::string>();
  raw.winner = j.at("winner").get<std::string>();
  verdict_from_string(raw.winner);  // reject unknown winner strings early
  raw.conversation_a = parse_conversation(j.at("conversation_a"), "conversation_a", line_no);
  raw.conversation_b = parse_conversation(j.at("conversation_b"), "conversation_b", line_no);
  if (j.contains("language") && j.at("language").is_string()) {
    raw.language = j.at("language").get<std::string>();
  }
  if (format == Format::kMtbenchJsonl && j.contains("turn") &&
      j.at("turn").is_number_integer()) {
    raw.turn = j.at("turn").get<int>();
  }
  return raw;
}

RationaleRecord extract_rationale(const RawConversationPair& raw, Side side) {
  const auto& conv = side == Side::kA ? raw.conversation_a : raw.conversation_b;
  const std::string& model = side == Side::kA ? raw.model_a : raw.model_b;
  bool has_assistant =
      std::any_of(conv.begin(), conv.end(), [](const Turn& t) { return t.role == "assistant"; });
  if (!has_assistant) {
    throw DataError("pair " + raw.question_id + " side " + (side == Side::kA ? "a" : "b") +
                    ": no assistant turn");
  }
  RationaleRecord rec;
  rec.question_id = raw.question_id;
  rec.model_id = model;
  rec.question_text = join_turns(conv, "user");
  rec.rationale_text = join_turns(conv, "assistant");
  if (rec.rationale_text.empty()) {
    throw DataError("pair " + raw.question_id + ": empty rationale for model " + model);
  }
  return rec;
}

PreferencePair to_preference_pair(const RawConversationPair& raw, const std::string& pair_id) {
  PreferencePair pair;
  pair.pair_id = pair_id;
  pair.side_a = extract_rationale(raw, Side::kA);
  pair.side_b = extract_rationale(raw, Side::kB);
  pair.side_a.question_id = pair_id;
  pair.side_b.question_id = pair_id;
  if (pair.side_a.question_text != pair.side_b.question_text) {
    throw DataError("pair " + pair_id + ": user turns differ between sides");
  }
  if (raw.model_a == raw.model_b) {
    throw DataError("pair " + pair_id + ": both sides from model " + raw.model_a);
  }
  pair.question = pair.side_a.question_text;
  pair.human_verdict = verdict_from_string(raw.winner);
  int users = 0;
  for (const Turn& t : raw.conversation_a) {
    if (t.role == "user") ++users;
  }
  pair.turn_count = users;
  return pair;
}

std::vector<PreferencePair> load_pairs(const std::filesystem::path& path, Format format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());

  std::vector<RawConversationPair> raws;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    raws.push_back(parse_raw_record(line, format, line_no));
  }

  // Disambiguate ids: question_id, plus -t<turn> for mt-bench records and a
  // -<k> occurrence suffix when the same base repeats within the file.
  std::map<std::string, int> base_counts;
  std::vector<std::string> bases;
  bases.reserve(raws.size());
  for (const RawConversationPair& raw : raws) {
    std::string base = raw.question_id;
    if (raw.turn > 0) base += "-t" + std::to_string(raw.turn);
    bases.push_back(base);
    base_counts[base]++;
  }
  std::map<std::string, int> seen;
  std::vector<PreferencePair> pairs;
  pairs.reserve(raws.size());
  for (size_t i = 0; i < raws.size(); ++i) {
    std::string id = bases[i];
    int k = seen[bases[i]]++;
    if (base_counts[bases[i]] > 1) id += "-" + std::to_string(k);
    pairs.push_back(to_preference_pair(raws[i], id));
  }
  return pairs;
}

namespace {

ojson record_to_json(const RationaleRecord& r) {
  return ojson{{"question_id", r.question_id},
               {"model_id", r.model_id},
               {"question_text", r.question_text},
               {"rationale_text", r.rationale_text}};
}

RationaleRecord record_from_json(const ojson& j) {
  RationaleRecord r;
  r.question_id = j.at("question_id").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.question_text = j.at("question_text").get<std::string>();
  r.rationale_text = j.at("rationale_text").get<std::string>();
  return r;
}

}  // namespace

std::string pairs_to_jsonl(const std::vector<PreferencePair>& pairs) {
  std::string out;
  for (const PreferencePair& p : pairs) {
    ojson j{{"pair_id", p.pair_id},
            {"question", p.question},
            {"side_a", record_to_json(p.side_a)},
            {"side_b", record_to_json(p.side_b)},
            {"human_verdict", verdict_to_string(p.human_verdict)},
            {"turn_count", p.turn_count}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<PreferencePair> pairs_from_jsonl_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pairs file: " + path.string());
  std::vector<PreferencePair> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const ojson::exception& e) {
      throw DataError("pairs file line " + std::to_string(line_no) + ": " + e.what());
    }
    PreferencePair p;
    p.pair_id = j.at("pair_id").get<std::string>();
    p.question = j.at("question").get<std::string>();
    p.side_a = record_from_json(j.at("side_a"));
    p.side_b = record_from_json(j.at("side_b"));
    p.human_verdict = verdict_from_string(j.at("human_verdict").get<std::string>());
    p.turn_count = j.value("turn_count", 1);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void save_pairs(const std::vector<PreferencePair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write pairs file: " + path.string());
  out << pairs_to_jsonl(pairs);
}

const std::string& filter_prompt_template() {
  static const std::string tmpl =
      "You are sorting user questions by topic.\n"
      "Classify the question below into exactly one category:\n"
      "math, logic, or other.\n"
      "Reply with the single category word in lowercase and nothing else.\n"
      "\n"
      "Example:\n"
      "Question: If a train travels 60 miles in 1.5 hours, what is its average speed?\n"
      "Category: math\n"
      "\n"
      "Question: {question}\n"
      "Category:";
  return tmpl;
}

std::string parse_category(const std::string& raw_response) {
  std::string token;
  for (char c : raw_response) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) break;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return token;
}

FilterResult filter_reasoning_pairs(const std::vector<PreferencePair>& pairs,
                                    const CategoryFn& classify, const FilterConfig& config) {
  FilterResult result;
  for (const PreferencePair& pair : pairs) {
    FilterDecision d;
    d.pair_id = pair.pair_id;
    try {
      d.judge_rationale = classify(pair.question);
      d.category = parse_category(d.judge_rationale);
      if (d.category.empty()) d.category = "other";
      d.keep = std::find(config.keep.begin(), config.keep.end(), d.category) != config.keep.end();
    } catch (const std::exception& e) {
      d.category = "undecided";
      d.keep = false;
      d.judge_rationale = std::string("classifier failure: ") + e.what();
      ++result.undecided;
    }
    if (d.keep) {
      result.kept.push_back(pair);
    } else if (d.category != "undecided") {
      ++result.dropped;
    }
    result.decisions.push_back(std::move(d));
  }
  return result;
}

std::string decisions_to_jsonl(const std::vector<FilterDecision>& decisions) {
  std::string out;
  for (const FilterDecision& d : decisions) {
    ojson j{{"pair_id", d.pair_id},
            {"keep", d.keep},
            {"category", d.category},
            {"judge_rationale", d.judge_rationale}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<FilterDecision> decisions_from_jsonl_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open decisions file: " + path.string());
  std::vector<FilterDecision> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ojson j = ojson::parse(line);
    FilterDecision d;
    d.pair_id = j.at("pair_id").get<std::string>();
    d.keep = j.at("keep").get<bool>();
    d.category = j.at("category").get<std::string>();
    d.judge_rationale = j.at("judge_rationale").get<std::string>();
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace rationeval::ingest

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rationeval/core.hpp"
#include "rationeval/types.hpp"

namespace rationeval::ingest {

enum class Format { kArenaJsonl, kMtbenchJsonl };

Format format_from_string(const std::string& s);

struct Turn {
  std::string role;
  std::string content;
};

// One record of the pairwise release schema before flattening.
struct RawConversationPair {
  std::string question_id;
  std::string model_a;
  std::string model_b;
  std::string winner;
  std::vector<Turn> conversation_a;
  std::vector<Turn> conversation_b;
  std::string language;  // optional, arena only
  int turn = 0;          // optional, mt-bench only (0 = absent)
};

enum class Side { kA, kB };

// Parses one JSONL record. `line_no` is used in error messages only.
RawConversationPair parse_raw_record(const std::string& line, Format format, size_t line_no);

// Flattens one conversation side: question_text joins the user turns with
// "\n\n", rationale_text joins the assistant turns. Throws DataError when
// the side has no assistant turn.
RationaleRecord extract_rationale(const RawConversationPair& raw, Side side);

PreferencePair to_preference_pair(const RawConversationPair& raw, const std::string& pair_id);

// Loads a pairwise preference file. Order is file order; pair ids are
// derived from question_id (suffixed when duplicated within the file).
std::vector<PreferencePair> load_pairs(const std::filesystem::path& path, Format format);

// Canonical pairs serialization (JSONL, one pair per line).
std::string pairs_to_jsonl(const std::vector<PreferencePair>& pairs);
std::vector<PreferencePair> pairs_from_jsonl_file(const std::filesystem::path& path);
void save_pairs(const std::vector<PreferencePair>& pairs, const std::filesystem::path& path);

struct FilterDecision {
  std::string pair_id;
  bool keep = false;
  std::string category;         // "math", "logic", "other", ... or "undecided"
  std::string judge_rationale;  // raw classifier response
};

struct FilterConfig {
  std::vector<std::string> keep = {"math", "logic"};
};

struct FilterResult {
  std::vector<PreferencePair> kept;
  std::vector<FilterDecision> decisions;
  size_t dropped = 0;
  size_t undecided = 0;
};

// Callable that classifies a question; returns the raw classifier response.
// Throwing marks the pair undecided (excluded and counted).
using CategoryFn = std::function<std::string(const std::string& question)>;

// One-shot classification prompt with a {question} placeholder.
const std::string& filter_prompt_template();

// Extracts the category token from a raw classifier response: first
// whitespace-delimited token, lowercased, stripped of punctuation.
std::string parse_category(const std::string& raw_response);

FilterResult filter_reasoning_pairs(const std::vector<PreferencePair>& pairs,
                                    const CategoryFn& classify, const FilterConfig& config);

std::string decisions_to_jsonl(const std::vector<FilterDecision>& decisions);
std::vector<FilterDecision> decisions_from_jsonl_file(const std::filesystem::path& path);

}  // namespace rationeval::ingest

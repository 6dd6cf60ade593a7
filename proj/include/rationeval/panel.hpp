#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rationeval/chat_client.hpp"
#include "rationeval/ingest.hpp"
#include "rationeval/judge.hpp"

namespace rationeval::judge {

struct JudgeFailure {
  std::string judge_id;
  std::string message;
};

struct SideScore {
  std::vector<JudgeVerdict> verdicts;
  std::vector<JudgeFailure> failures;
};

// Verdicts for one pair, both sides, keyed (pair_id, side, judge_id).
// A pair with an empty side is unscored and excluded downstream.
struct PairScore {
  std::string pair_id;
  SideScore a;
  SideScore b;

  bool scored() const { return !a.verdicts.empty() && !b.verdicts.empty(); }
  const SideScore& side(ingest::Side s) const { return s == ingest::Side::kA ? a : b; }
};

struct PanelOptions {
  int max_in_flight = 4;
};

// One template per judge, selected by the judge's native scale.
std::map<std::string, PromptTemplate> default_templates(std::span<const JudgeConfig> panel);

// Scores both sides with every judge on the panel. A judge failure (endpoint
// dead, verdict unparseable after retries) is recorded per (side, judge) and
// never aborts the other calls. Incomplete or malformed verdicts are retried
// whole, up to each judge's max_retries, with the retry attempt folded into
// the cache key.
PairScore score_pair_with_panel(ChatClient& client, const PreferencePair& pair,
                                std::span<const JudgeConfig> panel,
                                const std::map<std::string, PromptTemplate>& templates,
                                const PanelOptions& options = {});

std::string side_to_string(ingest::Side side);
ingest::Side side_from_string(const std::string& text);

// Verdict store: flat JSONL, one record per (pair_id, side, judge_id), in
// pair x side x panel order. Failures are records with an "error" field.
void save_verdicts(const std::filesystem::path& path, std::span<const PairScore> scores);
std::vector<PairScore> load_verdicts(const std::filesystem::path& path);

}  // namespace rationeval::judge

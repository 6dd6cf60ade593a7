#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rationeval/attributes.hpp"

namespace rationeval {

// 12 attribute scores in [0,1], 1.0 always best. Scores may be absent while
// a card is under construction; most operations require a complete card.
class ScoreCard {
 public:
  ScoreCard() = default;

  // Throws DataError when the value is outside [0,1].
  void set(Attribute a, double value);
  std::optional<double> get(Attribute a) const { return scores_[attribute_index(a)]; }

  // Value of a complete card; throws DataError when the score is absent.
  double at(Attribute a) const;

  bool complete() const;
  std::vector<Attribute> missing() const;

  bool operator==(const ScoreCard&) const = default;

 private:
  std::array<std::optional<double>, kAttributeCount> scores_;
};

// One rationale as extracted from a conversation side.
struct RationaleRecord {
  std::string question_id;
  std::string model_id;
  std::string question_text;
  std::string rationale_text;

  bool operator==(const RationaleRecord&) const = default;
};

enum class Verdict { kAWins, kBWins, kTie, kTieBothBad };

struct PreferencePair {
  std::string pair_id;
  std::string question;
  RationaleRecord side_a;
  RationaleRecord side_b;
  Verdict human_verdict = Verdict::kTie;
  int turn_count = 1;  // user turns folded into question_text

  bool operator==(const PreferencePair&) const = default;
};

// Parsed judge output. `card` holds normalized scores; the native scale is
// kept for audit.
struct JudgeVerdict {
  std::string judge_id;
  double native_scale_max = 1.0;
  ScoreCard card;
  std::map<Attribute, std::string> explanations;
  std::string raw_response;
};

// 12 reals in canonical attribute order: raw scores in [0,1] or per-pair
// score differences in [-1,1].
using FeatureVector = std::array<double, kAttributeCount>;

// Preference target: 1.0 first side preferred, 0.0 second side, 0.5 tie.
double verdict_label(Verdict v);

}  // namespace rationeval

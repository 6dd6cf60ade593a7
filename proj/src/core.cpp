#include "rationeval/core.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "rationeval/errors.hpp"

namespace rationeval {

void ScoreCard::set(Attribute a, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DataError("score for " + std::string(attribute_name(a)) + " outside [0,1]: " +
                    std::to_string(value));
  }
  scores_[attribute_index(a)] = value;
}

double ScoreCard::at(Attribute a) const {
  const auto& s = scores_[attribute_index(a)];
  if (!s) throw DataError("score card missing " + std::string(attribute_name(a)));
  return *s;
}

bool ScoreCard::complete() const {
  for (const auto& s : scores_) {
    if (!s) return false;
  }
  return true;
}

std::vector<Attribute> ScoreCard::missing() const {
  std::vector<Attribute> gaps;
  for (Attribute a : all_attributes()) {
    if (!scores_[attribute_index(a)]) gaps.push_back(a);
  }
  return gaps;
}

double verdict_label(Verdict v) {
  switch (v) {
    case Verdict::kAWins:
      return 1.0;
    case Verdict::kBWins:
      return 0.0;
    case Verdict::kTie:
    case Verdict::kTieBothBad:
      return 0.5;
  }
  throw InternalError("unreachable verdict");
}

double normalize_scale(double raw, double native_max) {
  if (!(native_max > 0.0)) {
    throw DataError("native scale max must be positive, got " + std::to_string(native_max));
  }
  if (!(raw >= 0.0 && raw <= native_max)) {
    throw DataError("raw score " + std::to_string(raw) + " outside [0, " +
                    std::to_string(native_max) + "]");
  }
  return raw / native_max;
}

namespace {

std::string missing_names(const ScoreCard& card) {
  std::string out;
  for (Attribute a : card.missing()) {
    if (!out.empty()) out += ", ";
    out += attribute_name(a);
  }
  return out;
}

}  // namespace

ScoreCard aggregate_cards(std::span<const ScoreCard> cards) {
  if (cards.empty()) throw DataError("cannot aggregate an empty panel");
  for (const ScoreCard& c : cards) {
    if (!c.complete()) {
      throw DataError("incomplete card in panel, missing: " + missing_names(c));
    }
  }
  ScoreCard out;
  for (Attribute a : all_attributes()) {
    double sum = 0.0;
    for (const ScoreCard& c : cards) sum += c.at(a);
    out.set(a, sum / static_cast<double>(cards.size()));
  }
  return out;
}

ScoreCard aggregate_panel(std::span<const JudgeVerdict> verdicts) {
  std::vector<ScoreCard> cards;
  cards.reserve(verdicts.size());
  for (const JudgeVerdict& v : verdicts) cards.push_back(v.card);
  return aggregate_cards(cards);
}

FeatureVector score_difference(const ScoreCard& a, const ScoreCard& b) {
  if (!a.complete()) throw DataError("left card incomplete, missing: " + missing_names(a));
  if (!b.complete()) throw DataError("right card incomplete, missing: " + missing_names(b));
  FeatureVector d{};
  for (Attribute attr : all_attributes()) {
    d[attribute_index(attr)] = a.at(attr) - b.at(attr);
  }
  return d;
}

ojson card_to_json(const ScoreCard& card) {
  ojson j = ojson::object();
  for (Attribute a : all_attributes()) {
    j[std::string(attribute_name(a))] = card.at(a);
  }
  return j;
}

ScoreCard card_from_json(const ojson& j) {
  if (!j.is_object()) throw DataError("score card JSON must be an object");
  ScoreCard card;
  for (const auto& [key, value] : j.items()) {
    auto attr = parse_attribute(key);
    if (!attr) throw DataError("unknown attribute in score card: " + key);
    if (!value.is_number()) throw DataError("non-numeric score for " + key);
    card.set(*attr, value.get<double>());
  }
  if (!card.complete()) {
    throw DataError("score card JSON incomplete, missing: " + missing_names(card));
  }
  return card;
}

std::string verdict_to_string(Verdict v) {
  switch (v) {
    case Verdict::kAWins:
      return "model_a";
    case Verdict::kBWins:
      return "model_b";
    case Verdict::kTie:
      return "tie";
    case Verdict::kTieBothBad:
      return "tie (bothbad)";
  }
  throw InternalError("unreachable verdict");
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "model_a") return Verdict::kAWins;
  if (s == "model_b") return Verdict::kBWins;
  if (s == "tie") return Verdict::kTie;
  if (s == "tie (bothbad)") return Verdict::kTieBothBad;
  throw DataError("unknown winner string: \"" + s + "\"");
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DataError("quantile p outside [0,1]");
  std::sort(values.begin(), values.end());
  double h = p * static_cast<double>(values.size() - 1);
  size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace rationeval

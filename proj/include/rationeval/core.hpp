#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rationeval/types.hpp"

namespace rationeval {

using ojson = nlohmann::ordered_json;

// Maps a raw judge score onto [0,1]. `native_max` is 1 or 10 in practice;
// any positive value is accepted. Out-of-range input throws DataError.
double normalize_scale(double raw, double native_max);

// Per-attribute arithmetic mean over complete cards. Throws DataError on an
// empty panel or any incomplete card (naming the gaps).
ScoreCard aggregate_cards(std::span<const ScoreCard> cards);
ScoreCard aggregate_panel(std::span<const JudgeVerdict> verdicts);

// values[i] = a[i] - b[i] in canonical order. Antisymmetric in its arguments.
FeatureVector score_difference(const ScoreCard& a, const ScoreCard& b);

// Canonical serialization: a flat JSON object mapping attribute display
// names to numbers, keys in canonical attribute order.
ojson card_to_json(const ScoreCard& card);
ScoreCard card_from_json(const ojson& j);

std::string verdict_to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

// Linear-interpolation quantile (R type 7, the numpy default). Sorts a copy.
// p in [0, 1]; empty input throws DataError.
double quantile_type7(std::vector<double> values, double p);

}  // namespace rationeval

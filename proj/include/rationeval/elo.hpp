#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rationeval/attributes.hpp"
#include "rationeval/ingest.hpp"
#include "rationeval/types.hpp"

namespace rationeval::elo {

struct EloConfig {
  double initial_rating = 1000.0;
  double k_factor = 4.0;
  double scale = 400.0;
  int permutations = 100;
  int bootstrap_samples = 1000;
  std::uint64_t seed = 0;
};

// What decided a match: the human verdict, or one attribute's panel-mean
// score. nullopt sorts first, so human tables lead exports.
struct Basis {
  std::optional<Attribute> attribute;

  bool human() const { return !attribute.has_value(); }
  std::string to_string() const;
  static Basis from_string(const std::string& text);
  auto operator<=>(const Basis&) const = default;
};

struct MatchOutcome {
  std::string pair_id;
  std::string model_a;
  std::string model_b;
  double score_a = 0.5;  // 1 a wins, 0 b wins, 0.5 tie; score_b is implied
  Basis basis;
};

struct RatingTable {
  Basis basis;
  std::map<std::string, double> ratings;
  std::map<std::string, double> ci_low;
  std::map<std::string, double> ci_high;
  std::map<std::string, int> games_played;
};

// score_a from the attribute gap between panel-mean cards: 1 above +epsilon,
// 0 below -epsilon, 0.5 inside the closed band.
MatchOutcome derive_outcome(const PreferencePair& pair, const ScoreCard& card_a,
                            const ScoreCard& card_b, Attribute attribute, double epsilon);

MatchOutcome derive_human_outcome(const PreferencePair& pair);

double expected_score(double r_a, double r_b, double scale);

// Sequential r <- r + K(S - E) passes over `permutations` seeded shuffles,
// averaged; CIs are 2.5/97.5 bootstrap percentiles over resampled outcome
// lists, each resample fully permutation-averaged.
RatingTable run_tournament(std::span<const MatchOutcome> outcomes, const EloConfig& config);

struct PairCards {
  ScoreCard a;
  ScoreCard b;
};

struct LeaderboardResult {
  std::map<Basis, RatingTable> tables;  // human preference + one per attribute
  std::size_t skipped_pairs = 0;        // pairs with no panel cards
};

// 13 tournaments over the same scored-pair population.
LeaderboardResult per_attribute_leaderboard(std::span<const PreferencePair> pairs,
                                            const std::map<std::string, PairCards>& cards,
                                            const EloConfig& config, double epsilon);

// rank 1 = highest rating; exact rating ties fall back to model id order.
std::vector<std::pair<std::string, int>> rank_models(const RatingTable& table);

ojson ranks_json(const LeaderboardResult& leaderboards);

}  // namespace rationeval::elo
